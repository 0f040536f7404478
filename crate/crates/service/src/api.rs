//! Request and response bodies. Field names are part of the wire format.

use std::collections::BTreeMap;

use polidoxa_core::{AdmissionState, Fingerprint, QuarantineRecord, Role, Timestamp, TrustScore, UserId};
use serde::{Deserialize, Serialize};

pub use crate::accounts::{PendingRegistration, Session};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterRequest {
    pub handle: String,
    pub credential: String,
    /// Handle on the external platform; defaults to `handle`.
    #[serde(default)]
    pub contact_handle: Option<String>,
    #[serde(default)]
    pub email: String,
    #[serde(default)]
    pub external_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidateRequest {
    pub token: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoginRequest {
    pub handle: String,
    pub credential: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountView {
    pub handle: UserId,
    pub role: Role,
    pub active: bool,
    /// Admission state in the quarantine holon, if any.
    pub admission: Option<AdmissionState>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustValue {
    pub value: TrustScore,
}

/// `hops` is 1 for a direct contact; `value` is null when unreachable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustView {
    pub contact: UserId,
    pub value: Option<TrustScore>,
    pub hops: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustQuery {
    /// `linear` (default) or `inverse_square`, for indirect contacts.
    pub decay: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicTrustView {
    pub contact: UserId,
    pub topic: String,
    pub value: TrustScore,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpertsQuery {
    pub topic: Option<String>,
    pub threshold: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpertsView {
    pub topic: String,
    pub threshold: TrustScore,
    pub experts: Vec<UserId>,
}

/// Raw search parameters, validated by the service.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchQuery {
    pub q: Option<String>,
    pub mode: Option<String>,
    pub from: Option<String>,
    pub to: Option<String>,
    /// comma separated
    pub friends: Option<String>,
    pub page: Option<String>,
    /// Evaluation instant for the activity window; defaults to now.
    pub as_of: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphImportReport {
    pub users: usize,
    pub follows: usize,
}

/// Partial coefficient update, e.g. `{"c_results":"0.09"}`.
pub type CoefficientPatch = BTreeMap<String, serde_json::Value>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRequest {
    pub candidate: String,
    #[serde(default)]
    pub contact_handle: Option<String>,
    #[serde(default)]
    pub email: String,
    #[serde(default)]
    pub external_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImmunizedEntry {
    pub fingerprint: Fingerprint,
    #[serde(with = "polidoxa_core::timestamp::iso")]
    pub since: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarantineView {
    pub records: Vec<QuarantineRecord>,
    pub immunized: Vec<ImmunizedEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportReport {
    pub dir: String,
    pub files: Vec<String>,
    pub users: usize,
    pub posts: usize,
    pub events: usize,
    pub admission_ops: usize,
}
