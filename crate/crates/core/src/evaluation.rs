//! Accuracy metrics and deterministic train/test splitting of
//! damage-index tables.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::damage_index::DiDataset;
use crate::error::{Error, Result};
use crate::signal::Fidelity;

fn check_pair(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::invalid(format!(
            "metric inputs differ in length: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::invalid("metric inputs are empty"));
    }
    if !pred.iter().chain(truth).all(|v| v.is_finite()) {
        return Err(Error::data("metric inputs must be finite"));
    }
    Ok(())
}

/// Root-mean-square error of predictions against ground truth.
pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair(pred, truth)?;
    let n = pred.len() as f64;
    let ss: f64 = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok((ss / n).sqrt())
}

/// Coefficient of determination against the test-set mean. Negative when
/// the predictor is worse than predicting that mean. Constant truth makes
/// the denominator zero and is rejected.
pub fn r_squared(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair(pred, truth)?;
    if truth.len() < 2 {
        return Err(Error::invalid("r-squared needs at least 2 points"));
    }
    let n = truth.len() as f64;
    let mean: f64 = truth.iter().sum::<f64>() / n;
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot <= 0.0 {
        return Err(Error::data(
            "ground truth is constant; r-squared is undefined",
        ));
    }
    let ss_res: f64 = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// How to split high-fidelity realizations into train and test sets.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    /// Fraction of each (path, state) group that goes to training,
    /// rounded down.
    pub train_fraction: f64,
    pub seed: u64,
    /// States whose realizations all stay in training (never tested),
    /// e.g. the undamaged state and the largest damage state.
    #[serde(default)]
    pub always_include_states: Vec<f64>,
}

impl SplitSpec {
    fn validate(&self) -> Result<()> {
        if !(self.train_fraction.is_finite()
            && self.train_fraction > 0.0
            && self.train_fraction <= 1.0)
        {
            return Err(Error::invalid(format!(
                "train fraction must be in (0, 1], got {}",
                self.train_fraction
            )));
        }
        if !self.always_include_states.iter().all(|s| s.is_finite()) {
            return Err(Error::invalid("pinned states must be finite"));
        }
        Ok(())
    }
}

/// Split a damage-index table into train and test tables.
///
/// Low-fidelity points always train. High-fidelity points are grouped by
/// (path, state); each group is shuffled with one seeded generator (groups
/// visited in sorted order, so the split is a pure function of the seed)
/// and the first `floor(train_fraction * group size)` realizations train.
/// Pinned states skip the shuffle entirely: all their realizations train.
pub fn split_realizations(data: &DiDataset, spec: &SplitSpec) -> Result<(DiDataset, DiDataset)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Group L2 point indices by (path, state), keyed in sorted order.
    let mut groups: std::collections::BTreeMap<(String, u64), Vec<usize>> =
        std::collections::BTreeMap::new();
    for (i, p) in data.points.iter().enumerate() {
        if p.fidelity == Fidelity::L2 {
            groups
                .entry((p.path_id.clone(), p.state.to_bits()))
                .or_default()
                .push(i);
        }
    }
    if groups.is_empty() {
        return Err(Error::data("no high-fidelity points to split"));
    }
    for s in &spec.always_include_states {
        if !groups.keys().any(|(_, bits)| f64::from_bits(*bits) == *s) {
            return Err(Error::data(format!(
                "pinned state {s} has no high-fidelity realizations"
            )));
        }
    }

    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for ((_, state_bits), indices) in &groups {
        let state = f64::from_bits(*state_bits);
        let mut order = indices.clone();
        order.shuffle(&mut rng);
        let n_train = if spec.always_include_states.iter().any(|s| *s == state) {
            order.len()
        } else {
            (spec.train_fraction * order.len() as f64).floor() as usize
        };
        train_idx.extend_from_slice(&order[..n_train]);
        test_idx.extend_from_slice(&order[n_train..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    let pick = |idx: &[usize], l1: bool| DiDataset {
        points: data
            .points
            .iter()
            .enumerate()
            .filter(|(i, p)| idx.binary_search(i).is_ok() || (l1 && p.fidelity == Fidelity::L1))
            .map(|(_, p)| p.clone())
            .collect(),
        di_kind: data.di_kind,
    };
    let train = pick(&train_idx, true);
    let test = pick(&test_idx, false);
    if test.points.is_empty() {
        log::warn!(
            "train fraction {} leaves no test points",
            spec.train_fraction
        );
    }
    Ok((train, test))
}
