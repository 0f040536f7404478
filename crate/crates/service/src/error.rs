use polidoxa_core::dynamic::CoefficientError;
use polidoxa_core::opinion::OpinionError;
use polidoxa_core::trust::TrustScoreError;
use polidoxa_core::{GraphError, LedgerError, QuarantineError, SearchError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    BadRequest,
    Unauthenticated,
    Forbidden,
    NotFound,
    Conflict,
    Internal,
}

impl ErrorKind {
    pub fn status(self) -> u16 {
        match self {
            ErrorKind::BadRequest => 400,
            ErrorKind::Unauthenticated => 401,
            ErrorKind::Forbidden => 403,
            ErrorKind::NotFound => 404,
            ErrorKind::Conflict => 409,
            ErrorKind::Internal => 500,
        }
    }

    pub fn from_status(status: u16) -> Self {
        match status {
            400 => ErrorKind::BadRequest,
            401 => ErrorKind::Unauthenticated,
            403 => ErrorKind::Forbidden,
            404 => ErrorKind::NotFound,
            409 => ErrorKind::Conflict,
            _ => ErrorKind::Internal,
        }
    }
}

/// Error body: `{"error":"forbidden","message":"..."}`.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{message}")]
pub struct ApiError {
    #[serde(rename = "error")]
    pub kind: ErrorKind,
    pub message: String,
}

impl ApiError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        ApiError {
            kind,
            message: message.into(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::BadRequest, message)
    }

    pub fn unauthenticated(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Unauthenticated, message)
    }

    pub fn forbidden(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Forbidden, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::NotFound, message)
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Conflict, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Internal, message)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("errors serialize")
    }
}

impl From<GraphError> for ApiError {
    fn from(e: GraphError) -> Self {
        let kind = match e {
            GraphError::UnknownUser(_) | GraphError::MissingEdge(..) => ErrorKind::NotFound,
            _ => ErrorKind::BadRequest,
        };
        ApiError::new(kind, e.to_string())
    }
}

impl From<TrustScoreError> for ApiError {
    fn from(e: TrustScoreError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

impl From<SearchError> for ApiError {
    fn from(e: SearchError) -> Self {
        let kind = match e {
            SearchError::UnknownUser(_) => ErrorKind::NotFound,
            SearchError::DuplicatePost(_) => ErrorKind::Conflict,
            _ => ErrorKind::BadRequest,
        };
        ApiError::new(kind, e.to_string())
    }
}

impl From<LedgerError> for ApiError {
    fn from(e: LedgerError) -> Self {
        let kind = match e {
            LedgerError::UnknownUser(_) => ErrorKind::NotFound,
            _ => ErrorKind::BadRequest,
        };
        ApiError::new(kind, e.to_string())
    }
}

impl From<CoefficientError> for ApiError {
    fn from(e: CoefficientError) -> Self {
        let kind = match e {
            CoefficientError::NotAdmin(_) => ErrorKind::Forbidden,
            _ => ErrorKind::BadRequest,
        };
        ApiError::new(kind, e.to_string())
    }
}

impl From<QuarantineError> for ApiError {
    fn from(e: QuarantineError) -> Self {
        let kind = match e {
            QuarantineError::Immunized | QuarantineError::NotMember(_) => ErrorKind::Forbidden,
            QuarantineError::UnknownCandidate(_) => ErrorKind::NotFound,
            QuarantineError::SelfStance(_) => ErrorKind::BadRequest,
            QuarantineError::Log { .. } => ErrorKind::Internal,
            _ => ErrorKind::Conflict,
        };
        ApiError::new(kind, e.to_string())
    }
}

impl From<OpinionError> for ApiError {
    fn from(e: OpinionError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

impl From<std::io::Error> for ApiError {
    fn from(e: std::io::Error) -> Self {
        ApiError::internal(format!("storage: {e}"))
    }
}
