//! Trust-ranked social search.
//!
//! A follow graph carries user-assigned static trust per contact (and per
//! topic). An append-only activity ledger feeds a dynamic trust that boosts
//! contacts the user actually interacts with. Keyword search over a
//! tweet-like post stream orders results by the author's trust. Admission of
//! new members goes through a peer-run quarantine with permanent
//! immunization of banned identities, and a lexicon classifier plus a
//! pheromone table forecast the polarity of a post stream.

pub mod dynamic;
pub mod fixed;
pub mod graph;
pub mod ingest;
pub mod ledger;
pub mod opinion;
pub mod quarantine;
pub mod search;
pub mod text;
pub mod timestamp;
pub mod trust;

pub use dynamic::{
    compute_dynamic_trust, ActivityCounts, Coefficient, CoefficientError, CoefficientSet,
    CoefficientStore, DynamicTrustInput, Role,
};
pub use graph::{DecayMode, GraphError, SocialGraph, Topic, UserId};
pub use ingest::{IngestReport, RejectedLine};
pub use ledger::{ActivityEvent, ActivityLedger, CounterQuery, EventKind, LedgerError};
pub use opinion::{classify, ForecastReport, Lexicon, OpinionError, PheromoneTable, Polarity};
pub use quarantine::{
    AdmissionOp, AdmissionState, Fingerprint, Holon, IdentityAttributes, QuarantineConfig,
    QuarantineError, QuarantineRecord, Reentry, StanceOutcome,
};
pub use search::{
    Post, PostInput, RankedResult, SearchError, SearchIndex, SearchPage, SearchRequest,
    TimeRange, TrustContext, TrustMode, PAGE_SIZE,
};
pub use timestamp::Timestamp;
pub use trust::TrustScore;
