//! Acquisition functions and the sequential design loop that decides where
//! to run the next low-fidelity simulation.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::evaluation::{r_squared, rmse};
use crate::mfgp::{default_mf_bounds, mf_fit, mf_predict, MfHyperparameters, MfTrainingData, TrainedMfGp};
use crate::optimizer::OptimizerConfig;
use crate::synth::linspace;

pub const DEFAULT_UCB_LAMBDA: f64 = 2.0;
pub const DEFAULT_EI_XI: f64 = 0.01;

/// Scoring rule for ranking candidate states. All rules are maximized.
#[derive(Clone)]
pub enum AcquisitionSpec {
    /// Squared gap between a reference curve and the predictive mean;
    /// targets regions where the surrogate disagrees with the reference.
    L2Loss {
        base: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
    /// Predictive variance.
    MaxVariance,
    /// Upper confidence bound `mean + lambda * sd`.
    Ucb { lambda: f64 },
    /// Expected improvement over the best predicted training mean.
    Ei { xi: f64 },
}

impl std::fmt::Debug for AcquisitionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AcquisitionSpec::L2Loss { .. } => f.write_str("L2Loss"),
            AcquisitionSpec::MaxVariance => f.write_str("MaxVariance"),
            AcquisitionSpec::Ucb { lambda } => write!(f, "Ucb {{ lambda: {lambda} }}"),
            AcquisitionSpec::Ei { xi } => write!(f, "Ei {{ xi: {xi} }}"),
        }
    }
}

impl AcquisitionSpec {
    pub fn ucb() -> Self {
        AcquisitionSpec::Ucb {
            lambda: DEFAULT_UCB_LAMBDA,
        }
    }

    pub fn ei() -> Self {
        AcquisitionSpec::Ei { xi: DEFAULT_EI_XI }
    }

    fn validate(&self) -> Result<()> {
        match self {
            AcquisitionSpec::Ucb { lambda } if !(lambda.is_finite() && *lambda >= 0.0) => Err(
                Error::invalid(format!("confidence weight must be nonnegative, got {lambda}")),
            ),
            AcquisitionSpec::Ei { xi } if !(xi.is_finite() && *xi >= 0.0) => Err(Error::invalid(
                format!("improvement margin must be nonnegative, got {xi}"),
            )),
            _ => Ok(()),
        }
    }
}

/// Squared gap between a reference value and the predictive mean.
pub fn acq_l2(base_values: &[f64], means: &[f64]) -> Result<Vec<f64>> {
    if base_values.len() != means.len() {
        return Err(Error::invalid("reference and mean lengths differ"));
    }
    Ok(base_values
        .iter()
        .zip(means)
        .map(|(b, m)| (b - m) * (b - m))
        .collect())
}

/// Predictive variance, as-is.
pub fn acq_max_variance(variances: &[f64]) -> Vec<f64> {
    variances.to_vec()
}

/// Upper confidence bound `mean + lambda * sd`.
pub fn acq_ucb(means: &[f64], sds: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid(format!(
            "confidence weight must be nonnegative, got {lambda}"
        )));
    }
    if means.len() != sds.len() {
        return Err(Error::invalid("mean and sd lengths differ"));
    }
    Ok(means
        .iter()
        .zip(sds)
        .map(|(m, s)| m + lambda * s)
        .collect())
}

/// Expected improvement of a Gaussian prediction over `incumbent + xi`.
/// Exactly zero when the predictive sd is zero.
pub fn expected_improvement(mean: f64, sd: f64, incumbent: f64, xi: f64) -> f64 {
    if sd <= 0.0 {
        return 0.0;
    }
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let gap = mean - incumbent - xi;
    let z = gap / sd;
    gap * std_normal.cdf(z) + sd * std_normal.pdf(z)
}

/// Expected improvement across a probe set.
pub fn acq_ei(means: &[f64], sds: &[f64], incumbent: f64, xi: f64) -> Result<Vec<f64>> {
    if means.len() != sds.len() {
        return Err(Error::invalid("mean and sd lengths differ"));
    }
    if !(xi.is_finite() && xi >= 0.0) {
        return Err(Error::invalid(format!(
            "improvement margin must be nonnegative, got {xi}"
        )));
    }
    Ok(means
        .iter()
        .zip(sds)
        .map(|(m, s)| expected_improvement(*m, *s, incumbent, xi))
        .collect())
}

/// Candidate low-fidelity evaluations the loop may draw from: a state and
/// the value a simulation at that state would return.
#[derive(Debug, Clone)]
pub struct CandidatePool {
    states: Vec<f64>,
    values: Vec<f64>,
    available: Vec<bool>,
}

impl CandidatePool {
    pub fn new(states: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::invalid("candidate pool is empty"));
        }
        if states.len() != values.len() {
            return Err(Error::invalid(format!(
                "pool has {} states but {} values",
                states.len(),
                values.len()
            )));
        }
        if !states.iter().chain(&values).all(|v| v.is_finite()) {
            return Err(Error::invalid("pool entries must be finite"));
        }
        let available = vec![true; states.len()];
        Ok(CandidatePool {
            states,
            values,
            available,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn n_available(&self) -> usize {
        self.available.iter().filter(|a| **a).count()
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    /// Remove a candidate and return its (state, value).
    pub fn take(&mut self, index: usize) -> Result<(f64, f64)> {
        if index >= self.states.len() || !self.available[index] {
            return Err(Error::invalid(format!(
                "pool candidate {index} is not available"
            )));
        }
        self.available[index] = false;
        Ok((self.states[index], self.values[index]))
    }

    fn available_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.available
            .iter()
            .enumerate()
            .filter(|(_, a)| **a)
            .map(|(i, _)| i)
    }
}

/// Index of the available pool candidate closest to `target`. Ties go to
/// the smaller state, then the smaller index. `None` when the pool is
/// exhausted.
pub fn select_next(pool: &CandidatePool, target: f64) -> Option<usize> {
    let mut best: Option<(usize, f64, f64)> = None; // (index, distance, state)
    for i in pool.available_indices() {
        let state = pool.states[i];
        let dist = (state - target).abs();
        let better = match &best {
            None => true,
            Some((_, bd, bs)) => dist < *bd || (dist == *bd && state < *bs),
        };
        if better {
            best = Some((i, dist, state));
        }
    }
    best.map(|(i, _, _)| i)
}

/// Shared settings for the sequential design loops.
#[derive(Debug, Clone)]
pub struct LoopConfig {
    pub n_iterations: usize,
    /// Held-out evaluation set: states and true high-fidelity values.
    pub test_states: Vec<f64>,
    pub test_values: Vec<f64>,
    pub noise_floor: f64,
    pub fit: OptimizerConfig,
}

/// One loop iteration: the model scored before the new point was added,
/// and the state that was then selected.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub selected_state: f64,
    pub rmse: f64,
    pub r_squared: f64,
    pub params: MfHyperparameters,
}

#[derive(Debug)]
pub struct LoopResult {
    pub history: Vec<IterationRecord>,
    pub final_model: TrainedMfGp,
}

const PROBE_COUNT: usize = 201;

enum Strategy<'a> {
    Acquisition(&'a AcquisitionSpec),
    Random(ChaCha8Rng),
}

/// Sequential design: each iteration fits the surrogate, scores it on the
/// held-out set, picks the probe maximizing the acquisition (ties to the
/// smaller state), and moves the nearest pool candidate into the
/// low-fidelity training block.
pub fn run_active_loop(
    config: &LoopConfig,
    data: &MfTrainingData,
    pool: CandidatePool,
    spec: &AcquisitionSpec,
) -> Result<LoopResult> {
    spec.validate()?;
    run_loop(config, data, pool, Strategy::Acquisition(spec))
}

/// Baseline loop: identical bookkeeping, but the next candidate is drawn
/// uniformly at random from the remaining pool.
pub fn run_random_loop(
    config: &LoopConfig,
    data: &MfTrainingData,
    pool: CandidatePool,
    seed: u64,
) -> Result<LoopResult> {
    run_loop(
        config,
        data,
        pool,
        Strategy::Random(ChaCha8Rng::seed_from_u64(seed)),
    )
}

fn run_loop(
    config: &LoopConfig,
    data: &MfTrainingData,
    mut pool: CandidatePool,
    mut strategy: Strategy<'_>,
) -> Result<LoopResult> {
    if config.test_states.len() != config.test_values.len() {
        return Err(Error::invalid("test state and value lengths differ"));
    }
    if config.test_states.len() < 2 {
        return Err(Error::invalid("evaluation set needs at least 2 points"));
    }
    if config.n_iterations > pool.n_available() {
        return Err(Error::invalid(format!(
            "{} iterations requested but the pool holds only {} candidates",
            config.n_iterations,
            pool.n_available()
        )));
    }

    let fit = |data: &MfTrainingData| -> Result<TrainedMfGp> {
        let bounds = default_mf_bounds(data, config.noise_floor)?;
        mf_fit(data, &bounds, config.noise_floor, &config.fit)
    };

    let mut data = data.clone();
    let mut history = Vec::with_capacity(config.n_iterations);
    for iteration in 0..config.n_iterations {
        let model = fit(&data)?;

        let test_pred = mf_predict(&model, &config.test_states);
        let means: Vec<f64> = test_pred.iter().map(|p| p.mean).collect();
        let loop_rmse = rmse(&means, &config.test_values)?;
        let loop_r2 = r_squared(&means, &config.test_values)?;

        let selected = match &mut strategy {
            Strategy::Acquisition(spec) => {
                let xs = data.all_xs();
                let lo = xs.iter().fold(f64::INFINITY, |a, &b| a.min(b));
                let hi = xs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                let probes = linspace(lo, hi, PROBE_COUNT);
                let pred = mf_predict(&model, &probes);
                let means: Vec<f64> = pred.iter().map(|p| p.mean).collect();
                let sds: Vec<f64> = pred.iter().map(|p| p.variance.sqrt()).collect();
                let scores = match spec {
                    AcquisitionSpec::L2Loss { base } => {
                        let reference: Vec<f64> = probes.iter().map(|&x| base(x)).collect();
                        acq_l2(&reference, &means)?
                    }
                    AcquisitionSpec::MaxVariance => {
                        acq_max_variance(&pred.iter().map(|p| p.variance).collect::<Vec<f64>>())
                    }
                    AcquisitionSpec::Ucb { lambda } => acq_ucb(&means, &sds, *lambda)?,
                    AcquisitionSpec::Ei { xi } => {
                        let train_pred = mf_predict(&model, data.x_l2());
                        let incumbent = train_pred
                            .iter()
                            .map(|p| p.mean)
                            .fold(f64::NEG_INFINITY, f64::max);
                        acq_ei(&means, &sds, incumbent, *xi)?
                    }
                };
                // First maximum wins; probes ascend, so ties go to the
                // smaller state.
                let mut best = 0;
                for (i, s) in scores.iter().enumerate() {
                    if *s > scores[best] {
                        best = i;
                    }
                }
                select_next(&pool, probes[best])
            }
            Strategy::Random(rng) => {
                let open: Vec<usize> = pool.available_indices().collect();
                Some(open[rng.gen_range(0..open.len())])
            }
        }
        .expect("pool size was checked against iteration count");

        let (state, value) = pool.take(selected)?;
        data = data.with_l1_point(state, value)?;
        history.push(IterationRecord {
            iteration,
            selected_state: state,
            rmse: loop_rmse,
            r_squared: loop_r2,
            params: model.params().clone(),
        });
    }

    let final_model = fit(&data)?;
    Ok(LoopResult {
        history,
        final_model,
    })
}
