//! Local accounts: handle plus a credential stub, validated through a
//! single-use token before the first login.

use std::collections::BTreeMap;

use polidoxa_core::{IdentityAttributes, Role, Timestamp, UserId};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Random 256-bit token, hex encoded.
pub fn random_token() -> String {
    let mut bytes = [0u8; 32];
    rand::rng().fill_bytes(&mut bytes);
    hex::encode(bytes)
}

fn hash_credential(salt: &str, credential: &str) -> String {
    let mut h = Sha256::new();
    h.update(salt.as_bytes());
    h.update([0]);
    h.update(credential.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    pub handle: UserId,
    pub role: Role,
    pub active: bool,
    pub identity: IdentityAttributes,
    salt: String,
    credential_hash: String,
    #[serde(with = "polidoxa_core::timestamp::iso")]
    pub created_at: Timestamp,
}

impl Account {
    pub fn new(handle: UserId, role: Role, credential: &str, identity: IdentityAttributes, at: Timestamp) -> Self {
        let salt = random_token();
        let credential_hash = hash_credential(&salt, credential);
        Account {
            handle,
            role,
            active: false,
            identity,
            salt,
            credential_hash,
            created_at: at,
        }
    }

    pub fn check_credential(&self, credential: &str) -> bool {
        hash_credential(&self.salt, credential) == self.credential_hash
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingRegistration {
    pub handle: UserId,
    pub validation_token: String,
    #[serde(with = "polidoxa_core::timestamp::iso")]
    pub expires_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub token: String,
    pub user: UserId,
    pub role: Role,
    #[serde(with = "polidoxa_core::timestamp::iso")]
    pub issued_at: Timestamp,
}

/// Accounts and pending registrations; the persisted part of the login
/// state. Sessions are kept in memory only.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountBook {
    pub accounts: BTreeMap<UserId, Account>,
    /// keyed by validation token
    pub pending: BTreeMap<String, PendingRegistration>,
}

impl AccountBook {
    pub fn get(&self, handle: &str) -> Option<&Account> {
        self.accounts.get(handle)
    }

    pub fn pending_for(&self, handle: &UserId) -> Option<&PendingRegistration> {
        self.pending.values().find(|p| &p.handle == handle)
    }

    pub fn drop_pending_for(&mut self, handle: &UserId) {
        self.pending.retain(|_, p| &p.handle != handle);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("accounts serialize");
        s.push('\n');
        s
    }
}
