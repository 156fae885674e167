//! Two-fidelity Gaussian process regression.
//!
//! The high-fidelity process is modeled as a scaled copy of the low-fidelity
//! process plus an independent discrepancy: f2(x) = rho * f1(x) + delta(x),
//! with f1 and delta zero-mean GPs under squared-exponential kernels. Both
//! fidelities' observations are stacked into one joint Gaussian whose
//! covariance is assembled blockwise, so training and prediction reduce to
//! standard GP algebra on the joint matrix.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chol::{cholesky_with_jitter, JitteredCholesky};
use crate::error::{Error, Result};
use crate::gp::{Prediction, LOG_2PI};
use crate::kernel::{gram, se_kernel, SeKernelParams};
use crate::optimizer::{minimize, OptimizerConfig, ParameterBox, Transform};

/// Low-fidelity (x_l1, y_l1) and high-fidelity (x_l2, y_l2) observations.
/// The low-fidelity block may be empty; the high-fidelity block may not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfTrainingData {
    x_l1: Vec<f64>,
    y_l1: Vec<f64>,
    x_l2: Vec<f64>,
    y_l2: Vec<f64>,
}

impl MfTrainingData {
    pub fn new(x_l1: Vec<f64>, y_l1: Vec<f64>, x_l2: Vec<f64>, y_l2: Vec<f64>) -> Result<Self> {
        if x_l1.len() != y_l1.len() {
            return Err(Error::invalid(format!(
                "low-fidelity inputs and targets differ in length: {} vs {}",
                x_l1.len(),
                y_l1.len()
            )));
        }
        if x_l2.len() != y_l2.len() {
            return Err(Error::invalid(format!(
                "high-fidelity inputs and targets differ in length: {} vs {}",
                x_l2.len(),
                y_l2.len()
            )));
        }
        if x_l2.is_empty() {
            return Err(Error::invalid(
                "at least one high-fidelity observation is required",
            ));
        }
        let all = x_l1.iter().chain(&y_l1).chain(&x_l2).chain(&y_l2);
        for v in all {
            if !v.is_finite() {
                return Err(Error::data(format!("non-finite training value {v}")));
            }
        }
        Ok(MfTrainingData {
            x_l1,
            y_l1,
            x_l2,
            y_l2,
        })
    }

    pub fn n1(&self) -> usize {
        self.x_l1.len()
    }

    pub fn n2(&self) -> usize {
        self.x_l2.len()
    }

    pub fn x_l1(&self) -> &[f64] {
        &self.x_l1
    }

    pub fn y_l1(&self) -> &[f64] {
        &self.y_l1
    }

    pub fn x_l2(&self) -> &[f64] {
        &self.x_l2
    }

    pub fn y_l2(&self) -> &[f64] {
        &self.y_l2
    }

    /// Targets stacked low-fidelity first, matching the joint covariance.
    pub fn stacked_y(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.n1() + self.n2(),
            self.y_l1.iter().chain(&self.y_l2).cloned(),
        )
    }

    /// Union of both fidelities' inputs (unsorted).
    pub fn all_xs(&self) -> Vec<f64> {
        self.x_l1.iter().chain(&self.x_l2).cloned().collect()
    }

    /// Copy with one more low-fidelity observation appended.
    pub fn with_l1_point(&self, x: f64, y: f64) -> Result<Self> {
        let mut x_l1 = self.x_l1.clone();
        let mut y_l1 = self.y_l1.clone();
        x_l1.push(x);
        y_l1.push(y);
        MfTrainingData::new(x_l1, y_l1, self.x_l2.clone(), self.y_l2.clone())
    }
}

/// Joint-model hyperparameters: low-fidelity kernel, discrepancy kernel,
/// fidelity scale factor, and per-fidelity noise variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MfHyperparameters {
    pub theta1: SeKernelParams,
    pub theta_d: SeKernelParams,
    pub rho: f64,
    pub noise1: f64,
    pub noise2: f64,
}

impl MfHyperparameters {
    pub fn validate(&self) -> Result<()> {
        SeKernelParams::new(self.theta1.variance, self.theta1.lengthscale)?;
        SeKernelParams::new(self.theta_d.variance, self.theta_d.lengthscale)?;
        if !self.rho.is_finite() {
            return Err(Error::invalid(format!("rho must be finite, got {}", self.rho)));
        }
        for (name, v) in [("noise1", self.noise1), ("noise2", self.noise2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Joint covariance of [y_l1; y_l2]:
///
/// ```text
/// [ G1(X1,X1) + noise1 I        rho G1(X1,X2)                         ]
/// [ rho G1(X2,X1)               rho^2 G1(X2,X2) + H(X2,X2) + noise2 I ]
/// ```
///
/// with G1 the low-fidelity kernel gram and H the discrepancy gram.
pub fn assemble_joint_covariance(data: &MfTrainingData, params: &MfHyperparameters) -> DMatrix<f64> {
    let (n1, n2) = (data.n1(), data.n2());
    let n = n1 + n2;
    let mut k = DMatrix::zeros(n, n);

    let g11 = gram(data.x_l1(), data.x_l1(), &params.theta1);
    let g12 = gram(data.x_l1(), data.x_l2(), &params.theta1);
    let g22 = gram(data.x_l2(), data.x_l2(), &params.theta1);
    let h22 = gram(data.x_l2(), data.x_l2(), &params.theta_d);

    for i in 0..n1 {
        for j in 0..n1 {
            k[(i, j)] = g11[(i, j)];
        }
        k[(i, i)] += params.noise1;
    }
    for i in 0..n1 {
        for j in 0..n2 {
            let v = params.rho * g12[(i, j)];
            k[(i, n1 + j)] = v;
            k[(n1 + j, i)] = v;
        }
    }
    let rho2 = params.rho * params.rho;
    for i in 0..n2 {
        for j in 0..n2 {
            k[(n1 + i, n1 + j)] = rho2 * g22[(i, j)] + h22[(i, j)];
        }
        k[(n1 + i, n1 + i)] += params.noise2;
    }
    k
}

/// Negative log marginal likelihood of the stacked observations under the
/// joint covariance.
pub fn mf_nlml(data: &MfTrainingData, params: &MfHyperparameters) -> Result<f64> {
    params.validate()?;
    let k = assemble_joint_covariance(data, params);
    let chol = cholesky_with_jitter(&k)?;
    let y = data.stacked_y();
    let alpha = chol.factor.solve(&y);
    let n = (data.n1() + data.n2()) as f64;
    Ok(0.5 * y.dot(&alpha) + 0.5 * chol.log_det() + 0.5 * n * LOG_2PI)
}

/// Noise floor from repeated high-fidelity observations: three times the
/// largest per-state sample variance (unbiased, n-1). States are grouped by
/// exact value; states with fewer than two observations are skipped. With no
/// repeated state at all the floor is 0.0 and a warning is logged.
pub fn variance_floor(state_value_pairs: &[(f64, f64)]) -> f64 {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for &(state, value) in state_value_pairs {
        groups.entry(state.to_bits()).or_default().push(value);
    }
    let mut max_var: Option<f64> = None;
    for values in groups.values() {
        let n = values.len();
        if n < 2 {
            continue;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        max_var = Some(max_var.map_or(var, |m| var.max(m)));
    }
    match max_var {
        Some(v) => 3.0 * v,
        None => {
            log::warn!("no state has repeated observations; variance floor defaults to 0");
            0.0
        }
    }
}

/// A fitted two-fidelity model with its joint factorization cached.
pub struct TrainedMfGp {
    data: MfTrainingData,
    params: MfHyperparameters,
    floor: f64,
    chol: JitteredCholesky,
    alpha: DVector<f64>,
}

impl std::fmt::Debug for TrainedMfGp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TrainedMfGp")
            .field("n1", &self.data.n1())
            .field("n2", &self.data.n2())
            .field("params", &self.params)
            .field("floor", &self.floor)
            .field("jitter", &self.chol.jitter)
            .finish()
    }
}

impl TrainedMfGp {
    pub fn from_params(data: MfTrainingData, params: MfHyperparameters, floor: f64) -> Result<Self> {
        params.validate()?;
        if !(floor.is_finite() && floor >= 0.0) {
            return Err(Error::invalid(format!(
                "variance floor must be finite and nonnegative, got {floor}"
            )));
        }
        let k = assemble_joint_covariance(&data, &params);
        let chol = cholesky_with_jitter(&k)?;
        let y = data.stacked_y();
        let alpha = chol.factor.solve(&y);
        Ok(TrainedMfGp {
            data,
            params,
            floor,
            chol,
            alpha,
        })
    }

    pub fn data(&self) -> &MfTrainingData {
        &self.data
    }

    pub fn params(&self) -> &MfHyperparameters {
        &self.params
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn jitter(&self) -> f64 {
        self.chol.jitter
    }

    pub fn nlml(&self) -> f64 {
        let y = self.data.stacked_y();
        let n = (self.data.n1() + self.data.n2()) as f64;
        0.5 * y.dot(&self.alpha) + 0.5 * self.chol.log_det() + 0.5 * n * LOG_2PI
    }

    pub fn to_json(&self) -> String {
        let repr = MfModelRepr {
            theta1: self.params.theta1,
            theta_d: self.params.theta_d,
            rho: self.params.rho,
            noise1: self.params.noise1,
            noise2: self.params.noise2,
            floor: self.floor,
            x_l1: self.data.x_l1().to_vec(),
            y_l1: self.data.y_l1().to_vec(),
            x_l2: self.data.x_l2().to_vec(),
            y_l2: self.data.y_l2().to_vec(),
        };
        serde_json::to_string_pretty(&repr).expect("plain floats serialize")
    }

    /// Rebuild from `to_json` output; the factorization is recomputed.
    pub fn from_json(text: &str) -> Result<Self> {
        let repr: MfModelRepr = serde_json::from_str(text)
            .map_err(|e| Error::data(format!("bad multi-fidelity model JSON: {e}")))?;
        let data = MfTrainingData::new(repr.x_l1, repr.y_l1, repr.x_l2, repr.y_l2)?;
        let params = MfHyperparameters {
            theta1: repr.theta1,
            theta_d: repr.theta_d,
            rho: repr.rho,
            noise1: repr.noise1,
            noise2: repr.noise2,
        };
        TrainedMfGp::from_params(data, params, repr.floor)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MfModelRepr {
    theta1: SeKernelParams,
    theta_d: SeKernelParams,
    rho: f64,
    noise1: f64,
    noise2: f64,
    floor: f64,
    x_l1: Vec<f64>,
    y_l1: Vec<f64>,
    x_l2: Vec<f64>,
    y_l2: Vec<f64>,
}

/// High-fidelity posterior at each probe. The cross-covariance row stacks
/// rho g1(x*, X1) over the low-fidelity block and rho^2 g1(x*, X2) + h(x*, X2)
/// over the high-fidelity block; the reported variance is the clamped
/// epistemic part plus the high-fidelity noise, so it never falls below
/// noise2.
pub fn mf_predict(model: &TrainedMfGp, x_star: &[f64]) -> Vec<Prediction> {
    let p = &model.params;
    let rho2 = p.rho * p.rho;
    let prior = rho2 * p.theta1.variance + p.theta_d.variance;
    let (n1, n2) = (model.data.n1(), model.data.n2());
    x_star
        .iter()
        .map(|&x| {
            let mut q = DVector::zeros(n1 + n2);
            for (i, &xi) in model.data.x_l1().iter().enumerate() {
                q[i] = p.rho * se_kernel(x, xi, &p.theta1);
            }
            for (j, &xj) in model.data.x_l2().iter().enumerate() {
                q[n1 + j] = rho2 * se_kernel(x, xj, &p.theta1) + se_kernel(x, xj, &p.theta_d);
            }
            let w = model.chol.factor.solve(&q);
            let mean = q.dot(&model.alpha);
            let epistemic = (prior - q.dot(&w)).max(0.0);
            Prediction {
                mean,
                variance: epistemic + p.noise2,
            }
        })
        .collect()
}

fn x_range(xs: &[f64]) -> f64 {
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let r = hi - lo;
    if r > 0.0 {
        r
    } else {
        1.0
    }
}

fn y_scale(ys: impl Iterator<Item = f64>) -> f64 {
    let values: Vec<f64> = ys.collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
    if var > 0.0 {
        return var;
    }
    let msq = values.iter().map(|y| y * y).sum::<f64>() / n;
    if msq > 0.0 {
        msq
    } else {
        1.0
    }
}

/// Parameter layout used by `mf_fit`:
/// [theta1 variance, theta1 lengthscale, theta_d variance,
///  theta_d lengthscale, rho, noise1, noise2].
///
/// Kernel variances span [1e-6, 100] of the stacked target variance,
/// lengthscales [0.05, 10] of the input range, rho is linear in [-10, 10],
/// and both noise lower bounds are raised to `noise_floor`.
pub fn default_mf_bounds(data: &MfTrainingData, noise_floor: f64) -> Result<ParameterBox> {
    if !(noise_floor.is_finite() && noise_floor >= 0.0) {
        return Err(Error::invalid(format!(
            "variance floor must be finite and nonnegative, got {noise_floor}"
        )));
    }
    let vy = y_scale(data.y_l1().iter().chain(data.y_l2()).cloned());
    let rx = x_range(&data.all_xs());
    let noise_lo = (1e-9 * vy).max(noise_floor);
    let noise_hi = (100.0 * vy).max(noise_lo);
    ParameterBox::new(
        vec![1e-6 * vy, 0.05 * rx, 1e-6 * vy, 0.05 * rx, -10.0, noise_lo, noise_lo],
        vec![100.0 * vy, 10.0 * rx, 100.0 * vy, 10.0 * rx, 10.0, noise_hi, noise_hi],
        vec![
            Transform::Log,
            Transform::Log,
            Transform::Log,
            Transform::Log,
            Transform::Linear,
            Transform::Log,
            Transform::Log,
        ],
    )
}

fn params_from_vec(p: &[f64]) -> Result<MfHyperparameters> {
    Ok(MfHyperparameters {
        theta1: SeKernelParams::new(p[0], p[1])?,
        theta_d: SeKernelParams::new(p[2], p[3])?,
        rho: p[4],
        noise1: p[5],
        noise2: p[6],
    })
}

/// Maximum-likelihood fit of the joint model. `noise_floor` is recorded in
/// the returned model; enforcing it is the caller's job via the bounds
/// (`default_mf_bounds` already raises both noise lower bounds to it).
/// The first optimizer start is the box center with rho overridden to 1.0.
pub fn mf_fit(
    data: &MfTrainingData,
    bounds: &ParameterBox,
    noise_floor: f64,
    config: &OptimizerConfig,
) -> Result<TrainedMfGp> {
    if bounds.dim() != 7 {
        return Err(Error::invalid(format!(
            "multi-fidelity fit expects a 7-dimensional parameter box, got {}",
            bounds.dim()
        )));
    }
    let objective = |p: &[f64]| -> f64 {
        match params_from_vec(p) {
            Ok(params) => mf_nlml(data, &params).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    };
    // Geometric center for the log-scaled dimensions, rho pinned at 1.0.
    let lo = bounds.lower();
    let hi = bounds.upper();
    let mut init: Vec<f64> = (0..7).map(|i| (lo[i] * hi[i]).abs().sqrt()).collect();
    init[4] = 1.0;
    let res = minimize(objective, bounds, config, Some(&init))?;
    let params = params_from_vec(&res.argmin)?;
    TrainedMfGp::from_params(data.clone(), params, noise_floor)
}
