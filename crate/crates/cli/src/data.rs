//! Turn a dataset spec into training data plus a held-out evaluation set.

use mfgpr_core::damage_index::{read_di_csv, DiDataset};
use mfgpr_core::evaluation::split_realizations;
use mfgpr_core::mfgp::{variance_floor, MfTrainingData};
use mfgpr_core::signal::Fidelity;
use mfgpr_core::synth::{generate, linspace, TruthCurve};
use mfgpr_core::{Error, Result};

use crate::config::DatasetSpec;

/// Training data and evaluation targets, ready for model fitting.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub train: MfTrainingData,
    pub test_states: Vec<f64>,
    pub test_values: Vec<f64>,
    /// Present for synthetic datasets only.
    pub truth: Option<TruthCurve>,
}

impl PreparedData {
    /// Noise-variance lower bound derived from repeated high-fidelity
    /// observations (0 when no state repeats).
    pub fn noise_floor(&self) -> f64 {
        let pairs: Vec<(f64, f64)> = self
            .train
            .x_l2()
            .iter()
            .copied()
            .zip(self.train.y_l2().iter().copied())
            .collect();
        variance_floor(&pairs)
    }
}

/// Load or generate the dataset. `seed_override` replaces the configured
/// split/generator seed when set.
pub fn prepare(spec: &DatasetSpec, seed_override: Option<u64>) -> Result<PreparedData> {
    let spec = match seed_override {
        Some(seed) => spec.clone().with_seed(seed),
        None => spec.clone(),
    };
    match spec {
        DatasetSpec::Csv {
            paths,
            di_kind,
            split,
        } => {
            if paths.is_empty() {
                return Err(Error::invalid("dataset lists no CSV paths"));
            }
            let mut points = Vec::new();
            for path in &paths {
                let table = read_di_csv(path, di_kind)?;
                points.extend(table.points);
            }
            let merged = DiDataset { points, di_kind };
            let (train, test) = split_realizations(&merged, &split)?;
            let (test_states, test_values): (Vec<f64>, Vec<f64>) = test
                .points
                .iter()
                .filter(|p| p.fidelity == Fidelity::L2)
                .map(|p| (p.state, p.value))
                .unzip();
            Ok(PreparedData {
                train: train.to_mf_training()?,
                test_states,
                test_values,
                truth: None,
            })
        }
        DatasetSpec::Synth {
            synth,
            n_test_probes,
        } => {
            if n_test_probes < 2 {
                return Err(Error::invalid(format!(
                    "need at least 2 test probes, got {n_test_probes}"
                )));
            }
            let ds = generate(&synth)?;
            let (lo, hi) = ds.truth.domain();
            let test_states = linspace(lo, hi, n_test_probes);
            let test_values = test_states.iter().map(|&x| ds.truth.high(x)).collect();
            Ok(PreparedData {
                train: ds.data,
                test_states,
                test_values,
                truth: Some(ds.truth),
            })
        }
    }
}
