use std::path::Path;

use he_emulator::BackendConfig;
use helba::BanditConfig;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AlgoId {
    Helba,
    Oful,
    Rsoful,
    RsofulTr,
}

impl AlgoId {
    pub const ALL: [AlgoId; 4] = [AlgoId::Helba, AlgoId::Oful, AlgoId::Rsoful, AlgoId::RsofulTr];

    pub fn name(self) -> &'static str {
        match self {
            Self::Helba => "helba",
            Self::Oful => "oful",
            Self::Rsoful => "rsoful",
            Self::RsofulTr => "rsoful-tr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    #[default]
    Exact,
    Noisy,
}

/// Everything needed to reproduce a set of runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub bandit: BanditConfig,
    pub backend: BackendConfig,
    pub backend_kind: BackendKind,
    /// Noise added after ciphertext products by the noisy backend when the
    /// backend section leaves `noise_std` at zero.
    pub noisy_std: f64,
    pub seeds: usize,
    pub first_seed: u64,
    pub algos: Vec<AlgoId>,
    /// Number of context sets cycled through.
    pub pool_size: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            bandit: BanditConfig::default(),
            backend: BackendConfig::default(),
            backend_kind: BackendKind::Exact,
            noisy_std: 1e-9,
            seeds: 25,
            first_seed: 0,
            algos: AlgoId::ALL.to_vec(),
            pool_size: 4,
        }
    }
}

impl ExperimentConfig {
    /// Reads TOML or JSON, chosen by file extension.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Ok(serde_json::from_str(&text)?),
            Some("toml") => Ok(toml::from_str(&text)?),
            _ => Err(HarnessError::Config(format!(
                "{}: expected a .toml or .json file",
                path.display()
            ))),
        }
    }

    /// Backend settings for one run: enough slots for the packed products
    /// and the arm vector, product noise for the noisy backend.
    pub fn backend_for(&self, seed: u64) -> BackendConfig {
        let mut b = self.backend.clone();
        let d = self.bandit.dim;
        b.n_slots = b.n_slots.max((2 * d * d).max(self.bandit.arms).next_power_of_two());
        b.seed = seed;
        if self.backend_kind == BackendKind::Noisy && b.noise_std == 0.0 {
            b.noise_std = self.noisy_std;
        }
        b
    }

    pub fn validate(&self) -> Result<Vec<String>> {
        if self.pool_size == 0 {
            return Err(HarnessError::Config("pool_size must be positive".into()));
        }
        if !(self.noisy_std >= 0.0) {
            return Err(HarnessError::Config("noisy_std must be nonnegative".into()));
        }
        self.backend_for(0)
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(self.bandit.validate()?)
    }
}
