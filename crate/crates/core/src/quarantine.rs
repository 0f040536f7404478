//! Peer-run admission of new members.
//!
//! Candidates start quarantined. Trusted members either approve them (an
//! approval quorum makes them Trusted) or flag them (a flag quorum bans
//! them). Trusted members can still be flagged and banned. A ban is final
//! and records the candidate's identity fingerprint, so later candidacies
//! carrying the same identity attributes are refused whatever handle they
//! use.
//!
//! Every accepted operation is appended to an admission log; replaying the
//! log onto an empty holon reproduces the state exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::UserId;
use crate::ingest::numbered_lines;
use crate::timestamp::Timestamp;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuarantineError {
    #[error("identity is immunized after a ban")]
    Immunized,
    #[error("`{0}` already has an active candidacy")]
    DuplicateCandidacy(UserId),
    #[error("`{0}` is already a trusted member")]
    AlreadyTrusted(UserId),
    #[error("`{0}` was banned")]
    CandidateBanned(UserId),
    #[error("no candidacy for `{0}`")]
    UnknownCandidate(UserId),
    #[error("`{0}` is not a trusted member")]
    NotMember(UserId),
    #[error("`{0}` is not quarantined")]
    NotQuarantined(UserId),
    #[error("`{peer}` already took a stance on `{candidate}`")]
    DuplicateStance { peer: UserId, candidate: UserId },
    #[error("`{0}` cannot take a stance on themselves")]
    SelfStance(UserId),
    #[error("line {line}: {message}")]
    Log { line: usize, message: String },
}

/// Identity attributes a fingerprint is derived from. The candidate's
/// handle inside the system is deliberately not one of them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityAttributes {
    #[serde(default)]
    pub contact_handle: String,
    #[serde(default)]
    pub email: String,
    #[serde(default)]
    pub external_id: String,
}

/// Lowercase hex SHA-256 over normalized identity attributes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fingerprint(String);

impl Fingerprint {
    pub fn of(attrs: &IdentityAttributes) -> Self {
        let handle = attrs.contact_handle.trim().trim_start_matches('@').to_lowercase();
        let email = normalize_email(&attrs.email);
        let external = attrs.external_id.trim().to_lowercase();
        let mut hasher = Sha256::new();
        for field in [handle, email, external] {
            hasher.update(field.as_bytes());
            hasher.update([0x1f]);
        }
        Fingerprint(hex::encode(hasher.finalize()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Lowercases and drops a `+tag` suffix from the local part.
fn normalize_email(email: &str) -> String {
    let email = email.trim().to_lowercase();
    match email.split_once('@') {
        Some((local, domain)) => {
            let local = local.split('+').next().unwrap_or_default();
            format!("{local}@{domain}")
        }
        None => email,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmissionState {
    Quarantined,
    Trusted,
    Banned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarantineRecord {
    pub candidate: UserId,
    pub fingerprint: Fingerprint,
    pub state: AdmissionState,
    pub approvals: BTreeSet<UserId>,
    pub flags: BTreeSet<UserId>,
    #[serde(with = "crate::timestamp::iso")]
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarantineConfig {
    pub approval_quorum: usize,
    pub flag_quorum: usize,
}

impl Default for QuarantineConfig {
    fn default() -> Self {
        QuarantineConfig {
            approval_quorum: 3,
            flag_quorum: 3,
        }
    }
}

/// One line of the admission log. `found` seeds a trusted founding member
/// without a vote.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum AdmissionOp {
    Found {
        member: UserId,
        fingerprint: Fingerprint,
        #[serde(with = "crate::timestamp::iso")]
        at: Timestamp,
    },
    Submit {
        candidate: UserId,
        fingerprint: Fingerprint,
        #[serde(with = "crate::timestamp::iso")]
        at: Timestamp,
    },
    Approve {
        peer: UserId,
        candidate: UserId,
        #[serde(with = "crate::timestamp::iso")]
        at: Timestamp,
    },
    Flag {
        peer: UserId,
        candidate: UserId,
        #[serde(with = "crate::timestamp::iso")]
        at: Timestamp,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reentry {
    Admissible,
    Immunized,
}

/// Result of an approve or flag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StanceOutcome {
    pub candidate: UserId,
    pub state: AdmissionState,
    pub approvals: usize,
    pub flags: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notice: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Holon {
    config: QuarantineConfig,
    records: BTreeMap<UserId, QuarantineRecord>,
    immunized: BTreeMap<Fingerprint, Timestamp>,
    log: Vec<AdmissionOp>,
}

impl Holon {
    pub fn new(config: QuarantineConfig) -> Self {
        Holon {
            config,
            ..Holon::default()
        }
    }

    pub fn config(&self) -> QuarantineConfig {
        self.config
    }

    pub fn record(&self, candidate: &str) -> Option<&QuarantineRecord> {
        self.records.get(candidate)
    }

    pub fn records(&self) -> impl Iterator<Item = &QuarantineRecord> {
        self.records.values()
    }

    pub fn immunized(&self) -> &BTreeMap<Fingerprint, Timestamp> {
        &self.immunized
    }

    pub fn log(&self) -> &[AdmissionOp] {
        &self.log
    }

    pub fn is_member(&self, user: &str) -> bool {
        self.records
            .get(user)
            .is_some_and(|r| r.state == AdmissionState::Trusted)
    }

    pub fn check_reentry(&self, fp: &Fingerprint) -> Reentry {
        if self.immunized.contains_key(fp) {
            Reentry::Immunized
        } else {
            Reentry::Admissible
        }
    }

    fn check_new(&self, candidate: &UserId, fp: &Fingerprint) -> Result<(), QuarantineError> {
        if self.immunized.contains_key(fp) {
            return Err(QuarantineError::Immunized);
        }
        match self.records.get(candidate).map(|r| r.state) {
            None => Ok(()),
            Some(AdmissionState::Quarantined) => {
                Err(QuarantineError::DuplicateCandidacy(candidate.clone()))
            }
            Some(AdmissionState::Trusted) => Err(QuarantineError::AlreadyTrusted(candidate.clone())),
            Some(AdmissionState::Banned) => Err(QuarantineError::CandidateBanned(candidate.clone())),
        }
    }

    fn insert(&mut self, candidate: UserId, fingerprint: Fingerprint, state: AdmissionState, at: Timestamp) {
        self.records.insert(
            candidate.clone(),
            QuarantineRecord {
                candidate,
                fingerprint,
                state,
                approvals: BTreeSet::new(),
                flags: BTreeSet::new(),
                created_at: at,
            },
        );
    }

    /// Seeds a founding member directly in the Trusted state.
    pub fn found(&mut self, member: UserId, fingerprint: Fingerprint, at: Timestamp) -> Result<&QuarantineRecord, QuarantineError> {
        self.check_new(&member, &fingerprint)?;
        self.log.push(AdmissionOp::Found {
            member: member.clone(),
            fingerprint: fingerprint.clone(),
            at,
        });
        self.insert(member.clone(), fingerprint, AdmissionState::Trusted, at);
        Ok(&self.records[&member])
    }

    pub fn submit_candidate(
        &mut self,
        candidate: UserId,
        fingerprint: Fingerprint,
        at: Timestamp,
    ) -> Result<&QuarantineRecord, QuarantineError> {
        self.check_new(&candidate, &fingerprint)?;
        self.log.push(AdmissionOp::Submit {
            candidate: candidate.clone(),
            fingerprint: fingerprint.clone(),
            at,
        });
        self.insert(candidate.clone(), fingerprint, AdmissionState::Quarantined, at);
        Ok(&self.records[&candidate])
    }

    fn stance_target(&self, peer: &UserId, candidate: &UserId) -> Result<&QuarantineRecord, QuarantineError> {
        let record = self
            .records
            .get(candidate)
            .ok_or_else(|| QuarantineError::UnknownCandidate(candidate.clone()))?;
        if !self.is_member(peer.as_str()) {
            return Err(QuarantineError::NotMember(peer.clone()));
        }
        Ok(record)
    }

    fn has_stance(record: &QuarantineRecord, peer: &UserId) -> bool {
        record.approvals.contains(peer) || record.flags.contains(peer)
    }

    fn outcome(&self, candidate: &UserId, notice: Option<String>) -> StanceOutcome {
        let r = &self.records[candidate];
        StanceOutcome {
            candidate: candidate.clone(),
            state: r.state,
            approvals: r.approvals.len(),
            flags: r.flags.len(),
            notice,
        }
    }

    pub fn approve(&mut self, peer: &UserId, candidate: &UserId, at: Timestamp) -> Result<StanceOutcome, QuarantineError> {
        let record = self.stance_target(peer, candidate)?;
        if record.state != AdmissionState::Quarantined {
            return Err(QuarantineError::NotQuarantined(candidate.clone()));
        }
        if Self::has_stance(record, peer) {
            return Err(QuarantineError::DuplicateStance {
                peer: peer.clone(),
                candidate: candidate.clone(),
            });
        }
        self.log.push(AdmissionOp::Approve {
            peer: peer.clone(),
            candidate: candidate.clone(),
            at,
        });
        let quorum = self.config.approval_quorum;
        let record = self.records.get_mut(candidate).expect("checked above");
        record.approvals.insert(peer.clone());
        if record.approvals.len() >= quorum {
            record.state = AdmissionState::Trusted;
        }
        Ok(self.outcome(candidate, None))
    }

    /// Flagging a banned record is a no-op reported through `notice`.
    pub fn flag(&mut self, peer: &UserId, candidate: &UserId, at: Timestamp) -> Result<StanceOutcome, QuarantineError> {
        let record = self.stance_target(peer, candidate)?;
        if record.state == AdmissionState::Banned {
            return Ok(self.outcome(candidate, Some(format!("`{candidate}` is already banned"))));
        }
        if peer == candidate {
            return Err(QuarantineError::SelfStance(peer.clone()));
        }
        if Self::has_stance(record, peer) {
            return Err(QuarantineError::DuplicateStance {
                peer: peer.clone(),
                candidate: candidate.clone(),
            });
        }
        self.log.push(AdmissionOp::Flag {
            peer: peer.clone(),
            candidate: candidate.clone(),
            at,
        });
        let quorum = self.config.flag_quorum;
        let record = self.records.get_mut(candidate).expect("checked above");
        record.flags.insert(peer.clone());
        if record.flags.len() >= quorum {
            record.state = AdmissionState::Banned;
            let fp = record.fingerprint.clone();
            self.immunized.entry(fp).or_insert(at);
        }
        Ok(self.outcome(candidate, None))
    }

    /// Applies one logged operation.
    pub fn apply(&mut self, op: AdmissionOp) -> Result<(), QuarantineError> {
        match op {
            AdmissionOp::Found { member, fingerprint, at } => self.found(member, fingerprint, at).map(drop),
            AdmissionOp::Submit { candidate, fingerprint, at } => {
                self.submit_candidate(candidate, fingerprint, at).map(drop)
            }
            AdmissionOp::Approve { peer, candidate, at } => self.approve(&peer, &candidate, at).map(drop),
            AdmissionOp::Flag { peer, candidate, at } => self.flag(&peer, &candidate, at).map(drop),
        }
    }

    pub fn export_log(&self) -> String {
        self.log.iter().map(op_line).collect()
    }

    /// Rebuilds a holon from an exported admission log.
    pub fn replay(config: QuarantineConfig, log: &str) -> Result<Self, QuarantineError> {
        let mut holon = Holon::new(config);
        for (line, raw) in numbered_lines(log) {
            let op: AdmissionOp = serde_json::from_str(raw).map_err(|e| QuarantineError::Log {
                line,
                message: e.to_string(),
            })?;
            holon.apply(op).map_err(|e| QuarantineError::Log {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(holon)
    }
}

pub fn op_line(op: &AdmissionOp) -> String {
    let mut s = serde_json::to_string(op).expect("ops serialize");
    s.push('\n');
    s
}
