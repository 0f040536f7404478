//! Lexicon polarity classification and a pheromone-based forecaster for the
//! polarity of the next post in a stream.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpinionError {
    #[error("`{0}` is listed as both positive and negative")]
    Overlap(String),
    #[error("line {line}: {message}")]
    Lexicon { line: usize, message: String },
    #[error("evaporation rate must lie in [0, 1), got {0}")]
    BadRho(f64),
    #[error("deposit must be positive, got {0}")]
    BadDeposit(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Positive,
    Negative,
    NoOpinion,
}

impl Polarity {
    pub const ALL: [Polarity; 3] = [Polarity::Positive, Polarity::Negative, Polarity::NoOpinion];

    fn index(self) -> usize {
        match self {
            Polarity::Positive => 0,
            Polarity::Negative => 1,
            Polarity::NoOpinion => 2,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
            Polarity::NoOpinion => "no_opinion",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    positive: HashSet<String>,
    negative: HashSet<String>,
}

impl Lexicon {
    /// Words are normalized the same way post text is tokenized.
    pub fn new<P, N>(positive: P, negative: N) -> Result<Self, OpinionError>
    where
        P: IntoIterator,
        P::Item: AsRef<str>,
        N: IntoIterator,
        N::Item: AsRef<str>,
    {
        let norm = |w: &str| tokenize(w).concat();
        let positive: HashSet<String> = positive.into_iter().map(|w| norm(w.as_ref())).filter(|w| !w.is_empty()).collect();
        let negative: HashSet<String> = negative.into_iter().map(|w| norm(w.as_ref())).filter(|w| !w.is_empty()).collect();
        if let Some(w) = positive.intersection(&negative).min() {
            return Err(OpinionError::Overlap(w.clone()));
        }
        Ok(Lexicon { positive, negative })
    }

    /// `word<TAB>+` / `word<TAB>-` lines. Blank lines and `#` comments skipped.
    pub fn parse_tsv(text: &str) -> Result<Self, OpinionError> {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| OpinionError::Lexicon { line: i + 1, message };
            let (word, sign) = line
                .split_once('\t')
                .ok_or_else(|| err(format!("expected `word<TAB>+|-`, got `{line}`")))?;
            match sign.trim() {
                "+" => pos.push(word),
                "-" => neg.push(word),
                other => return Err(err(format!("unknown polarity mark `{other}`"))),
            }
        }
        Lexicon::new(pos, neg)
    }

    /// Small English word list used when no lexicon file is configured.
    pub fn builtin() -> Self {
        const POSITIVE: &[&str] = &[
            "good", "great", "love", "like", "excellent", "happy", "best", "awesome", "nice",
            "wonderful", "amazing", "fantastic", "win", "glad", "perfect", "brilliant", "enjoy",
            "beautiful", "cool", "fun",
        ];
        const NEGATIVE: &[&str] = &[
            "bad", "terrible", "hate", "awful", "worst", "sad", "poor", "horrible", "angry", "fail",
            "ugly", "boring", "wrong", "broken", "disappointing", "lose", "sucks", "annoying",
            "crap", "scam",
        ];
        Lexicon::new(POSITIVE, NEGATIVE).expect("built-in lexicon is disjoint")
    }

    pub fn is_positive(&self, word: &str) -> bool {
        self.positive.contains(word)
    }

    pub fn is_negative(&self, word: &str) -> bool {
        self.negative.contains(word)
    }

    /// The same lexicon with the two word classes exchanged.
    pub fn mirrored(&self) -> Self {
        Lexicon {
            positive: self.negative.clone(),
            negative: self.positive.clone(),
        }
    }
}

/// Compares the relative frequencies of positive and negative words among
/// the tokens of `text`. Both frequencies share the token count as their
/// denominator, so comparing raw counts is exact.
pub fn classify(text: &str, lex: &Lexicon) -> Polarity {
    let (mut pos, mut neg) = (0usize, 0usize);
    for token in tokenize(text) {
        if lex.is_positive(&token) {
            pos += 1;
        } else if lex.is_negative(&token) {
            neg += 1;
        }
    }
    match pos.cmp(&neg) {
        std::cmp::Ordering::Greater => Polarity::Positive,
        std::cmp::Ordering::Less => Polarity::Negative,
        std::cmp::Ordering::Equal => Polarity::NoOpinion,
    }
}

/// Per-polarity pheromone levels. Each observation evaporates every level by
/// `rho` and then deposits on the observed polarity.
#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneTable {
    tau: [f64; 3],
    rho: f64,
    deposit: f64,
}

impl PheromoneTable {
    pub const DEFAULT_RHO: f64 = 0.1;
    pub const DEFAULT_DEPOSIT: f64 = 1.0;

    pub fn new(rho: f64, deposit: f64) -> Result<Self, OpinionError> {
        if !(0.0..1.0).contains(&rho) {
            return Err(OpinionError::BadRho(rho));
        }
        if !(deposit > 0.0 && deposit.is_finite()) {
            return Err(OpinionError::BadDeposit(deposit));
        }
        Ok(PheromoneTable {
            tau: [0.0; 3],
            rho,
            deposit,
        })
    }

    pub fn tau(&self, p: Polarity) -> f64 {
        self.tau[p.index()]
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn deposit(&self) -> f64 {
        self.deposit
    }

    pub fn observe(&mut self, p: Polarity) {
        for t in &mut self.tau {
            *t *= 1.0 - self.rho;
        }
        self.tau[p.index()] += self.deposit;
    }

    /// Strongest trail; any tie (including a fresh table) is `NoOpinion`.
    pub fn predict(&self) -> Polarity {
        let best = self.tau.iter().copied().fold(f64::MIN, f64::max);
        let mut leaders = Polarity::ALL.into_iter().filter(|p| self.tau(*p) == best);
        match (leaders.next(), leaders.next()) {
            (Some(p), None) => p,
            _ => Polarity::NoOpinion,
        }
    }
}

impl Default for PheromoneTable {
    fn default() -> Self {
        PheromoneTable::new(Self::DEFAULT_RHO, Self::DEFAULT_DEPOSIT).expect("valid defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauReport {
    pub positive: String,
    pub negative: String,
    pub no_opinion: String,
}

/// Forecast for one stream. Pheromone levels are printed with six decimals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub stream: String,
    pub observations: usize,
    pub tau: TauReport,
    pub prediction: Polarity,
}

impl ForecastReport {
    /// Classifies `texts` in order, feeding each polarity to `table`.
    pub fn run<'a>(
        stream: &str,
        texts: impl IntoIterator<Item = &'a str>,
        lex: &Lexicon,
        mut table: PheromoneTable,
    ) -> Self {
        let mut observations = 0;
        for text in texts {
            table.observe(classify(text, lex));
            observations += 1;
        }
        let six = |p| format!("{:.6}", table.tau(p));
        ForecastReport {
            stream: stream.to_string(),
            observations,
            tau: TauReport {
                positive: six(Polarity::Positive),
                negative: six(Polarity::Negative),
                no_opinion: six(Polarity::NoOpinion),
            },
            prediction: table.predict(),
        }
    }
}
