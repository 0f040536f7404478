//! Dynamic trust: the static trust of a contact boosted by coefficient-weighted
//! activity counts and per-query match counts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::fixed::{div_round_half_up, format_fixed, parse_fixed, FixedError};
use crate::graph::UserId;
use crate::trust::TrustScore;

const COEFF_DECIMALS: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoefficientError {
    #[error("coefficient `{0}` is negative")]
    Negative(String),
    #[error("invalid coefficient: {0}")]
    Invalid(FixedError),
    #[error("unknown coefficient `{0}`")]
    UnknownName(String),
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("`{0}` is not an administrator")]
    NotAdmin(UserId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Admin,
    Normal,
}

/// Trust-percent per counted event, in units of 0.0001.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Coefficient(u64);

impl Coefficient {
    pub const ZERO: Coefficient = Coefficient(0);

    pub fn from_ten_thousandths(v: u64) -> Self {
        Coefficient(v)
    }

    pub fn ten_thousandths(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_fixed(self.0, COEFF_DECIMALS))
    }
}

impl FromStr for Coefficient {
    type Err = CoefficientError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match parse_fixed(s, COEFF_DECIMALS) {
            Ok(v) => Ok(Coefficient(v)),
            Err(FixedError::Negative(v)) => Err(CoefficientError::Negative(v)),
            Err(e) => Err(CoefficientError::Invalid(e)),
        }
    }
}

impl Serialize for Coefficient {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Coefficient {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(serde_json::Number),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Text(s) => s,
            Raw::Number(n) => n.to_string(),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub c_favorites: Coefficient,
    pub c_retweets: Coefficient,
    pub c_mentions: Coefficient,
    pub c_fridayfollows: Coefficient,
    pub c_results: Coefficient,
}

impl Default for CoefficientSet {
    fn default() -> Self {
        let quarter = Coefficient(2_500);
        CoefficientSet {
            c_favorites: quarter,
            c_retweets: quarter,
            c_mentions: quarter,
            c_fridayfollows: quarter,
            c_results: Coefficient(500),
        }
    }
}

impl CoefficientSet {
    pub const NAMES: [&'static str; 5] = [
        "c_favorites",
        "c_retweets",
        "c_mentions",
        "c_fridayfollows",
        "c_results",
    ];

    pub fn zero() -> Self {
        CoefficientSet {
            c_favorites: Coefficient::ZERO,
            c_retweets: Coefficient::ZERO,
            c_mentions: Coefficient::ZERO,
            c_fridayfollows: Coefficient::ZERO,
            c_results: Coefficient::ZERO,
        }
    }

    fn slot(&mut self, name: &str) -> Result<&mut Coefficient, CoefficientError> {
        Ok(match name {
            "c_favorites" => &mut self.c_favorites,
            "c_retweets" => &mut self.c_retweets,
            "c_mentions" => &mut self.c_mentions,
            "c_fridayfollows" => &mut self.c_fridayfollows,
            "c_results" => &mut self.c_results,
            other => return Err(CoefficientError::UnknownName(other.to_string())),
        })
    }

    pub fn get(&self, name: &str) -> Result<Coefficient, CoefficientError> {
        let mut copy = *self;
        copy.slot(name).map(|c| *c)
    }

    pub fn set(&mut self, name: &str, value: Coefficient) -> Result<(), CoefficientError> {
        *self.slot(name)? = value;
        Ok(())
    }

    pub fn entries(&self) -> [(&'static str, Coefficient); 5] {
        [
            ("c_favorites", self.c_favorites),
            ("c_retweets", self.c_retweets),
            ("c_mentions", self.c_mentions),
            ("c_fridayfollows", self.c_fridayfollows),
            ("c_results", self.c_results),
        ]
    }

    /// `key=value` lines, four decimals.
    pub fn to_config(&self) -> String {
        self.entries()
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    /// Parses `key=value` lines over the defaults. Blank lines and `#`
    /// comments are ignored.
    pub fn from_config(text: &str) -> Result<Self, CoefficientError> {
        let mut set = CoefficientSet::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| CoefficientError::Config {
                line: i + 1,
                message,
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
            let value: Coefficient = v.trim().parse().map_err(|e: CoefficientError| err(e.to_string()))?;
            set.set(k.trim(), value).map_err(|e| err(e.to_string()))?;
        }
        Ok(set)
    }
}

/// Window counts of a searcher's interactions with one contact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ActivityCounts {
    pub favorites: u64,
    pub retweets: u64,
    pub mentions: u64,
    pub fridayfollows: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DynamicTrustInput {
    pub static_trust: TrustScore,
    pub activity: ActivityCounts,
    pub results_count: u64,
    pub coefficients: CoefficientSet,
}

/// `static + Σ cᵢ·nᵢ`, rounded half-up to hundredths and clamped to 100.00.
/// Evaluated in 0.0001-percent integer units, so results are exact.
pub fn compute_dynamic_trust(input: &DynamicTrustInput) -> TrustScore {
    let c = &input.coefficients;
    let a = &input.activity;
    let terms = [
        (c.c_favorites, a.favorites),
        (c.c_retweets, a.retweets),
        (c.c_mentions, a.mentions),
        (c.c_fridayfollows, a.fridayfollows),
        (c.c_results, input.results_count),
    ];
    let boost: u128 = terms
        .iter()
        .map(|(coef, n)| u128::from(coef.ten_thousandths()) * u128::from(*n))
        .fold(0u128, u128::saturating_add);
    let total = (u128::from(input.static_trust.hundredths()) * 100).saturating_add(boost);
    TrustScore::saturating_from_hundredths(div_round_half_up(total, 100))
}

/// The administrator-controlled coefficient configuration.
#[derive(Debug, Clone, Default)]
pub struct CoefficientStore {
    current: CoefficientSet,
}

impl CoefficientStore {
    pub fn new(current: CoefficientSet) -> Self {
        CoefficientStore { current }
    }

    pub fn current(&self) -> CoefficientSet {
        self.current
    }

    pub fn set(
        &mut self,
        caller: &UserId,
        role: Role,
        coefficients: CoefficientSet,
    ) -> Result<(), CoefficientError> {
        if role != Role::Admin {
            return Err(CoefficientError::NotAdmin(caller.clone()));
        }
        self.current = coefficients;
        Ok(())
    }
}
