use std::path::PathBuf;

use polidoxa_core::search::DEFAULT_MAX_LEN;
use polidoxa_core::{PheromoneTable, QuarantineConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BootstrapAdmin {
    pub handle: String,
    pub credential: String,
}

impl std::str::FromStr for BootstrapAdmin {
    type Err = String;

    /// `handle:credential`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (handle, credential) = s
            .split_once(':')
            .ok_or_else(|| "expected handle:credential".to_string())?;
        if handle.is_empty() || credential.is_empty() {
            return Err("expected handle:credential".into());
        }
        Ok(BootstrapAdmin {
            handle: handle.into(),
            credential: credential.into(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// `None` keeps everything in memory.
    pub data_dir: Option<PathBuf>,
    pub max_len: usize,
    pub quarantine: QuarantineConfig,
    pub rho: f64,
    pub deposit: f64,
    pub registration_ttl: chrono::Duration,
    /// Created on first start when no account exists yet.
    pub bootstrap_admin: Option<BootstrapAdmin>,
    /// Tab-separated lexicon; the built-in word list when unset.
    pub lexicon: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            data_dir: None,
            max_len: DEFAULT_MAX_LEN,
            quarantine: QuarantineConfig::default(),
            rho: PheromoneTable::DEFAULT_RHO,
            deposit: PheromoneTable::DEFAULT_DEPOSIT,
            registration_ttl: chrono::Duration::hours(24),
            bootstrap_admin: None,
            lexicon: None,
        }
    }
}
