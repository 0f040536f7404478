//! UTC instants at second precision, written as `2012-05-01T12:00:00Z`.

use chrono::{DateTime, SubsecRound, Utc};
use thiserror::Error;

pub type Timestamp = DateTime<Utc>;

const FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid ISO-8601 UTC timestamp `{0}`")]
pub struct TimestampError(pub String);

pub fn parse(s: &str) -> Result<Timestamp, TimestampError> {
    DateTime::parse_from_rfc3339(s.trim())
        .map(|t| t.with_timezone(&Utc).trunc_subsecs(0))
        .map_err(|_| TimestampError(s.to_string()))
}

pub fn format(t: &Timestamp) -> String {
    t.format(FORMAT).to_string()
}

/// Serde adapter: `#[serde(with = "crate::timestamp::iso")]`.
pub mod iso {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::Timestamp;

    pub fn serialize<S: Serializer>(t: &Timestamp, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&super::format(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Timestamp, D::Error> {
        let raw = String::deserialize(d)?;
        super::parse(&raw).map_err(serde::de::Error::custom)
    }
}
