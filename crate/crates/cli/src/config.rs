//! Strict JSON config schemas for every subcommand. Unknown fields are
//! rejected so experiment definitions cannot silently drift.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mfgpr_core::damage_index::DiKind;
use mfgpr_core::evaluation::SplitSpec;
use mfgpr_core::optimizer::OptimizerConfig;
use mfgpr_core::synth::SynthConfig;
use mfgpr_core::{Error, Result};

/// Where a task's damage-index data comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    /// Damage-index CSV files; high-fidelity realizations are split into
    /// train/test by `split`.
    Csv {
        paths: Vec<PathBuf>,
        di_kind: DiKind,
        split: SplitSpec,
    },
    /// Generated two-fidelity data; the model is evaluated against the
    /// known truth curve on a uniform probe grid.
    Synth {
        synth: SynthConfig,
        #[serde(default = "default_test_probes")]
        n_test_probes: usize,
    },
}

impl DatasetSpec {
    /// Replace the dataset's randomness seed (split seed for CSV data,
    /// generator seed for synthetic data).
    pub fn with_seed(mut self, seed: u64) -> Self {
        match &mut self {
            DatasetSpec::Csv { split, .. } => split.seed = seed,
            DatasetSpec::Synth { synth, .. } => synth.seed = seed,
        }
        self
    }

    pub fn is_synthetic(&self) -> bool {
        matches!(self, DatasetSpec::Synth { .. })
    }
}

fn default_test_probes() -> usize {
    100
}

pub fn default_n_probes() -> usize {
    201
}

/// Optional packet window applied before damage-index extraction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    /// Window start, seconds (absolute time).
    pub start: f64,
    /// Window length, seconds.
    pub length: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractDiConfig {
    /// Signal-set directory (manifest.json plus waveform CSVs).
    pub signal_set: PathBuf,
    pub di_kind: DiKind,
    #[serde(default)]
    pub window: Option<WindowSpec>,
    #[serde(default)]
    pub taper_fraction: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub dataset: DatasetSpec,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_n_probes")]
    pub n_probes: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task1Config {
    pub dataset: DatasetSpec,
    /// How many low-fidelity points to add, in coverage order. Defaults
    /// to every available L1 point.
    #[serde(default)]
    pub max_added_l1: Option<usize>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_n_probes")]
    pub n_probes: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task2Config {
    pub dataset: DatasetSpec,
    /// States never replaced by simulation. Defaults to the smallest and
    /// largest high-fidelity states.
    #[serde(default)]
    pub pinned_states: Option<Vec<f64>>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_n_probes")]
    pub n_probes: usize,
}

/// Acquisition rules runnable by the sequential-design command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcquisitionName {
    L2Loss,
    MaxVariance,
    Ucb,
    Ei,
    Random,
}

impl std::fmt::Display for AcquisitionName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self {
            AcquisitionName::L2Loss => "l2_loss",
            AcquisitionName::MaxVariance => "max_variance",
            AcquisitionName::Ucb => "ucb",
            AcquisitionName::Ei => "ei",
            AcquisitionName::Random => "random",
        };
        f.write_str(tag)
    }
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

fn default_lambda() -> f64 {
    mfgpr_core::active_learning::DEFAULT_UCB_LAMBDA
}

fn default_xi() -> f64 {
    mfgpr_core::active_learning::DEFAULT_EI_XI
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task3Config {
    pub dataset: DatasetSpec,
    pub acquisitions: Vec<AcquisitionName>,
    pub n_iterations: usize,
    /// Each seed regenerates the dataset (and drives the random baseline).
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_lambda")]
    pub ucb_lambda: f64,
    #[serde(default = "default_xi")]
    pub ei_xi: f64,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthCmdConfig {
    pub synth: SynthConfig,
    pub di_kind: DiKind,
}

fn default_state_unit() -> String {
    "load".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructConfig {
    /// Compensation model JSON.
    pub model: PathBuf,
    /// Baseline signal-set directory.
    pub signal_set: PathBuf,
    /// Load levels to reconstruct; these become the output states.
    pub loads: Vec<f64>,
    /// Uniform strain per unit load.
    pub strain_per_unit_load: f64,
    #[serde(default = "default_state_unit")]
    pub state_unit: String,
}

/// Read and parse a config file; any failure here is a config error.
pub fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::invalid(format!("config {}: {e}", path.display())))
}
