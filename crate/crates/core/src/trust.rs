use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::fixed::{format_fixed, parse_fixed, FixedError};

/// A trust percentage in `[0.00, 100.00]`, stored as hundredths of a percent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TrustScore(u16);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrustScoreError {
    #[error("trust value out of range [0.00, 100.00]: {0}")]
    OutOfRange(String),
    #[error(transparent)]
    Parse(#[from] FixedError),
}

impl TrustScore {
    pub const MAX_HUNDREDTHS: u16 = 10_000;
    pub const ZERO: TrustScore = TrustScore(0);
    pub const MAX: TrustScore = TrustScore(Self::MAX_HUNDREDTHS);
    /// Value assigned to a freshly followed contact.
    pub const DEFAULT: TrustScore = TrustScore(5_000);

    pub fn from_hundredths(hundredths: u32) -> Result<Self, TrustScoreError> {
        if hundredths > u32::from(Self::MAX_HUNDREDTHS) {
            return Err(TrustScoreError::OutOfRange(format_fixed(u64::from(hundredths), 2)));
        }
        Ok(TrustScore(hundredths as u16))
    }

    /// Clamps to the valid range instead of failing.
    pub fn saturating_from_hundredths(hundredths: u128) -> Self {
        TrustScore(hundredths.min(u128::from(Self::MAX_HUNDREDTHS)) as u16)
    }

    /// Whole percent, e.g. `TrustScore::percent(99)`. Panics above 100.
    pub fn percent(value: u16) -> Self {
        Self::from_hundredths(u32::from(value) * 100).expect("percent above 100")
    }

    pub fn hundredths(self) -> u16 {
        self.0
    }
}

impl fmt::Display for TrustScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_fixed(u64::from(self.0), 2))
    }
}

impl FromStr for TrustScore {
    type Err = TrustScoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let units = match parse_fixed(s, 2) {
            Ok(u) => u,
            Err(FixedError::Negative(v)) | Err(FixedError::Overflow(v)) => {
                return Err(TrustScoreError::OutOfRange(v))
            }
            Err(e) => return Err(e.into()),
        };
        if units > u64::from(Self::MAX_HUNDREDTHS) {
            return Err(TrustScoreError::OutOfRange(s.trim().to_string()));
        }
        Ok(TrustScore(units as u16))
    }
}

impl Serialize for TrustScore {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TrustScore {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        // Accept both "55.00" and bare JSON numbers.
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(serde_json::Number),
        }
        let text = match Raw::deserialize(deserializer)? {
            Raw::Text(s) => s,
            Raw::Number(n) => n.to_string(),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}
