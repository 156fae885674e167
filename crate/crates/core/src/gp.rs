//! Single-fidelity Gaussian process regression with a squared-exponential
//! kernel and homoscedastic observation noise.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::chol::{cholesky_with_jitter, JitteredCholesky};
use crate::error::{Error, Result};
use crate::kernel::{gram, se_kernel, SeKernelParams};
use crate::optimizer::{minimize, OptimizerConfig, ParameterBox, Transform};

pub const LOG_2PI: f64 = 1.8378770664093453;

/// Posterior mean and variance of the observable at one input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

/// Scalar inputs paired with observed targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpTrainingData {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl GpTrainingData {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::invalid(format!(
                "training inputs and targets differ in length: {} vs {}",
                xs.len(),
                ys.len()
            )));
        }
        if xs.is_empty() {
            return Err(Error::invalid("training data must not be empty"));
        }
        if let Some(v) = xs.iter().chain(ys.iter()).find(|v| !v.is_finite()) {
            return Err(Error::data(format!("non-finite training value {v}")));
        }
        Ok(GpTrainingData { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }
}

/// Negative log marginal likelihood
/// 0.5 y'K^-1 y + 0.5 ln|K| + (n/2) ln(2 pi), K = gram + noise I.
pub fn gp_nlml(data: &GpTrainingData, params: &SeKernelParams, noise_variance: f64) -> Result<f64> {
    if !(noise_variance.is_finite() && noise_variance >= 0.0) {
        return Err(Error::invalid(format!(
            "noise variance must be finite and nonnegative, got {noise_variance}"
        )));
    }
    let mut k = gram(data.xs(), data.xs(), params);
    for i in 0..k.nrows() {
        k[(i, i)] += noise_variance;
    }
    let chol = cholesky_with_jitter(&k)?;
    let y = DVector::from_column_slice(data.ys());
    let alpha = chol.factor.solve(&y);
    let n = data.len() as f64;
    Ok(0.5 * y.dot(&alpha) + 0.5 * chol.log_det() + 0.5 * n * LOG_2PI)
}

/// A fitted (or directly constructed) GP with its factorization cached.
pub struct TrainedGp {
    data: GpTrainingData,
    params: SeKernelParams,
    noise_variance: f64,
    chol: JitteredCholesky,
    alpha: DVector<f64>,
}

impl std::fmt::Debug for TrainedGp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TrainedGp")
            .field("n", &self.data.len())
            .field("params", &self.params)
            .field("noise_variance", &self.noise_variance)
            .field("jitter", &self.chol.jitter)
            .finish()
    }
}

impl TrainedGp {
    /// Factor the training covariance at fixed hyperparameters.
    pub fn from_params(
        data: GpTrainingData,
        params: SeKernelParams,
        noise_variance: f64,
    ) -> Result<Self> {
        if !(noise_variance.is_finite() && noise_variance >= 0.0) {
            return Err(Error::invalid(format!(
                "noise variance must be finite and nonnegative, got {noise_variance}"
            )));
        }
        let mut k = gram(data.xs(), data.xs(), &params);
        for i in 0..k.nrows() {
            k[(i, i)] += noise_variance;
        }
        let chol = cholesky_with_jitter(&k)?;
        let y = DVector::from_column_slice(data.ys());
        let alpha = chol.factor.solve(&y);
        Ok(TrainedGp {
            data,
            params,
            noise_variance,
            chol,
            alpha,
        })
    }

    pub fn data(&self) -> &GpTrainingData {
        &self.data
    }

    pub fn params(&self) -> &SeKernelParams {
        &self.params
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Diagonal jitter the factorization needed (0.0 in the usual case).
    pub fn jitter(&self) -> f64 {
        self.chol.jitter
    }

    pub fn nlml(&self) -> f64 {
        let y = DVector::from_column_slice(self.data.ys());
        let n = self.data.len() as f64;
        0.5 * y.dot(&self.alpha) + 0.5 * self.chol.log_det() + 0.5 * n * LOG_2PI
    }

    pub fn to_json(&self) -> String {
        let repr = GpModelRepr {
            variance: self.params.variance,
            lengthscale: self.params.lengthscale,
            noise: self.noise_variance,
            xs: self.data.xs().to_vec(),
            ys: self.data.ys().to_vec(),
        };
        serde_json::to_string_pretty(&repr).expect("plain floats serialize")
    }

    /// Rebuild from `to_json` output; the factorization is recomputed.
    pub fn from_json(text: &str) -> Result<Self> {
        let repr: GpModelRepr = serde_json::from_str(text)
            .map_err(|e| Error::data(format!("bad GP model JSON: {e}")))?;
        let data = GpTrainingData::new(repr.xs, repr.ys)?;
        let params = SeKernelParams::new(repr.variance, repr.lengthscale)?;
        TrainedGp::from_params(data, params, repr.noise)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GpModelRepr {
    variance: f64,
    lengthscale: f64,
    noise: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

/// Posterior at each probe input. The reported variance is for the noisy
/// observable: epistemic part (clamped at zero) plus the noise variance.
pub fn gp_predict(model: &TrainedGp, x_star: &[f64]) -> Vec<Prediction> {
    x_star
        .iter()
        .map(|&x| {
            let q = DVector::from_iterator(
                model.data.len(),
                model.data.xs().iter().map(|&xi| se_kernel(x, xi, &model.params)),
            );
            let w = model.chol.factor.solve(&q);
            let mean = q.dot(&model.alpha);
            let epistemic = (model.params.variance - q.dot(&w)).max(0.0);
            Prediction {
                mean,
                variance: epistemic + model.noise_variance,
            }
        })
        .collect()
}

/// Spread of the inputs with a fallback for degenerate designs.
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

/// Population variance of the targets with a fallback for constant data.
fn y_scale(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let var = ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
    if var > 0.0 {
        return var;
    }
    let msq = ys.iter().map(|y| y * y).sum::<f64>() / n;
    if msq > 0.0 {
        msq
    } else {
        1.0
    }
}

/// Default box for [kernel variance, lengthscale, noise variance]:
/// variances span [1e-6, 100] of the target variance, the lengthscale spans
/// [0.05, 10] of the input range, and the noise lower bound is raised to
/// `noise_floor` when that is larger.
pub fn default_gp_bounds(data: &GpTrainingData, noise_floor: f64) -> Result<ParameterBox> {
    let vy = y_scale(data.ys());
    let rx = x_range(data.xs());
    let noise_lo = (1e-9 * vy).max(noise_floor);
    let noise_hi = (100.0 * vy).max(noise_lo);
    ParameterBox::new(
        vec![1e-6 * vy, 0.05 * rx, noise_lo],
        vec![100.0 * vy, 10.0 * rx, noise_hi],
        vec![Transform::Log, Transform::Log, Transform::Log],
    )
}

/// Maximum-likelihood fit over [variance, lengthscale, noise variance].
pub fn gp_fit(
    data: &GpTrainingData,
    bounds: &ParameterBox,
    config: &OptimizerConfig,
) -> Result<TrainedGp> {
    if bounds.dim() != 3 {
        return Err(Error::invalid(format!(
            "GP fit expects a 3-dimensional parameter box, got {}",
            bounds.dim()
        )));
    }
    let objective = |p: &[f64]| -> f64 {
        match SeKernelParams::new(p[0], p[1]) {
            Ok(params) => gp_nlml(data, &params, p[2]).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    };
    let res = minimize(objective, bounds, config, None)?;
    let params = SeKernelParams::new(res.argmin[0], res.argmin[1])?;
    TrainedGp::from_params(data.clone(), params, res.argmin[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn unit_params() -> SeKernelParams {
        SeKernelParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn scalar_nlml_closed_form() {
        // K = [2]: 0.5*4/2 + 0.5*ln 2 + 0.5*ln(2 pi) = 2.26551212...
        let data = GpTrainingData::new(vec![0.0], vec![2.0]).unwrap();
        let v = gp_nlml(&data, &unit_params(), 1.0).unwrap();
        assert_relative_eq!(v, 2.26551212, epsilon = 1e-6);
    }

    #[test]
    fn nlml_matches_dense_oracle() {
        // Independent evaluation via explicit inverse and determinant.
        let xs = vec![0.0, 0.3, 1.1, 2.0];
        let ys = vec![0.5, -0.2, 0.9, 0.1];
        let params = SeKernelParams::new(1.4, 0.7).unwrap();
        let noise = 0.05;
        let data = GpTrainingData::new(xs.clone(), ys.clone()).unwrap();

        let mut k = gram(&xs, &xs, &params);
        for i in 0..4 {
            k[(i, i)] += noise;
        }
        let det = k.determinant();
        let kinv = k.try_inverse().unwrap();
        let y = DVector::from_column_slice(&ys);
        let oracle = 0.5 * (y.transpose() * &kinv * &y)[(0, 0)] + 0.5 * det.ln() + 2.0 * LOG_2PI;

        let v = gp_nlml(&data, &params, noise).unwrap();
        assert_relative_eq!(v, oracle, epsilon = 1e-9);
    }

    #[test]
    fn noiseless_interpolation() {
        let xs: Vec<f64> = vec![0.0, 0.5, 1.0, 1.5, 2.0];
        let ys: Vec<f64> = xs.iter().map(|x| (1.3 * x).sin()).collect();
        let data = GpTrainingData::new(xs.clone(), ys.clone()).unwrap();
        let model = TrainedGp::from_params(data, unit_params(), 0.0).unwrap();
        let preds = gp_predict(&model, &xs);
        for (p, y) in preds.iter().zip(&ys) {
            assert!((p.mean - y).abs() < 1e-6, "mean {} vs target {y}", p.mean);
            assert!(p.variance <= 1e-6, "variance {} at a training input", p.variance);
        }
    }

    #[test]
    fn far_field_reverts_to_prior() {
        let data = GpTrainingData::new(vec![0.0, 1.0], vec![1.0, -1.0]).unwrap();
        let params = SeKernelParams::new(2.0, 0.5).unwrap();
        let noise = 0.3;
        let model = TrainedGp::from_params(data, params, noise).unwrap();
        let p = gp_predict(&model, &[500.0])[0];
        assert!(p.mean.abs() < 1e-12);
        assert_relative_eq!(p.variance, 2.0 + 0.3, epsilon = 1e-12);
    }

    #[test]
    fn variance_never_exceeds_prior() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..12).map(|_| rng.gen_range(0.0..4.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
        let params = SeKernelParams::new(1.7, 0.6).unwrap();
        let noise = 0.02;
        let model =
            TrainedGp::from_params(GpTrainingData::new(xs, ys).unwrap(), params, noise).unwrap();
        let probes: Vec<f64> = (0..200).map(|i| -1.0 + 6.0 * i as f64 / 199.0).collect();
        for p in gp_predict(&model, &probes) {
            assert!(p.variance <= 1.7 + 0.02 + 1e-10);
            assert!(p.variance >= 0.0);
        }
    }

    #[test]
    fn conditioning_never_raises_variance() {
        // Adding one training point keeps every probe variance from rising.
        let params = SeKernelParams::new(1.0, 0.8).unwrap();
        let noise = 0.05;
        let xs = vec![0.0, 1.0, 2.5];
        let ys = vec![0.3, -0.1, 0.8];
        let small =
            TrainedGp::from_params(GpTrainingData::new(xs.clone(), ys.clone()).unwrap(), params, noise)
                .unwrap();
        let mut xs2 = xs;
        let mut ys2 = ys;
        xs2.push(1.7);
        ys2.push(0.2);
        let big =
            TrainedGp::from_params(GpTrainingData::new(xs2, ys2).unwrap(), params, noise).unwrap();
        let probes: Vec<f64> = (0..100).map(|i| -0.5 + 3.5 * i as f64 / 99.0).collect();
        let va = gp_predict(&small, &probes);
        let vb = gp_predict(&big, &probes);
        for (a, b) in va.iter().zip(&vb) {
            assert!(
                b.variance <= a.variance + 1e-8,
                "variance rose from {} to {}",
                a.variance,
                b.variance
            );
        }
    }

    /// Draw one sample path of a zero-mean GP at `xs`.
    fn sample_gp(xs: &[f64], params: &SeKernelParams, noise: f64, seed: u64) -> Vec<f64> {
        let mut k = gram(xs, xs, params);
        for i in 0..xs.len() {
            k[(i, i)] += noise + 1e-12;
        }
        let l = k.cholesky().unwrap().l();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = DVector::from_iterator(
            xs.len(),
            (0..xs.len()).map(|_| rand_distr::StandardNormal.sample(&mut rng)),
        );
        (l * z).iter().cloned().collect()
    }

    #[test]
    fn fit_recovers_lengthscale_within_factor_two() {
        let truth = SeKernelParams::new(1.0, 0.2).unwrap();
        let noise = 0.01;
        let xs: Vec<f64> = (0..40).map(|i| i as f64 / 39.0).collect();
        for seed in 0..5u64 {
            let ys = sample_gp(&xs, &truth, noise, 100 + seed);
            let data = GpTrainingData::new(xs.clone(), ys).unwrap();
            let bounds = default_gp_bounds(&data, 0.0).unwrap();
            let cfg = OptimizerConfig {
                restarts: 6,
                max_evals: 400,
                tolerance: 1e-8,
                seed,
            };
            let model = gp_fit(&data, &bounds, &cfg).unwrap();
            let l = model.params().lengthscale;
            assert!(
                l > 0.1 && l < 0.4,
                "seed {seed}: fitted lengthscale {l} outside factor 2 of 0.2"
            );
        }
    }

    #[test]
    fn single_point_fit_succeeds() {
        let data = GpTrainingData::new(vec![0.7], vec![2.0]).unwrap();
        let bounds = default_gp_bounds(&data, 0.0).unwrap();
        let model = gp_fit(&data, &bounds, &OptimizerConfig::default()).unwrap();
        let p = gp_predict(&model, &[0.7])[0];
        // Mean shrinks towards zero by the noise share of the variance.
        let shrink = model.noise_variance() / (model.params().variance + model.noise_variance());
        assert!((p.mean - 2.0).abs() <= 2.0 * shrink + 1e-6);
    }

    #[test]
    fn fit_respects_collapsed_box() {
        let data = GpTrainingData::new(vec![0.0, 1.0, 2.0], vec![0.1, 0.5, 0.2]).unwrap();
        let bounds = ParameterBox::new(
            vec![0.8, 0.9, 0.01],
            vec![0.8, 0.9, 0.01],
            vec![Transform::Log, Transform::Log, Transform::Log],
        )
        .unwrap();
        let model = gp_fit(&data, &bounds, &OptimizerConfig::default()).unwrap();
        assert_eq!(model.params().variance, 0.8);
        assert_eq!(model.params().lengthscale, 0.9);
        assert_eq!(model.noise_variance(), 0.01);
    }

    #[test]
    fn fit_honors_noise_floor() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let data = GpTrainingData::new(xs, ys).unwrap();
        let floor = 0.05;
        let bounds = default_gp_bounds(&data, floor).unwrap();
        let cfg = OptimizerConfig {
            restarts: 4,
            max_evals: 300,
            tolerance: 1e-8,
            seed: 2,
        };
        let model = gp_fit(&data, &bounds, &cfg).unwrap();
        assert!(model.noise_variance() >= floor - 1e-12);
    }

    #[test]
    fn json_round_trip_reproduces_predictions() {
        let xs = vec![0.0, 0.4, 1.2, 2.2];
        let ys = vec![0.1, 0.7, -0.3, 0.9];
        let data = GpTrainingData::new(xs, ys).unwrap();
        let params = SeKernelParams::new(1.1, 0.9).unwrap();
        let model = TrainedGp::from_params(data, params, 0.02).unwrap();
        let text = model.to_json();
        let back = TrainedGp::from_json(&text).unwrap();
        let probes = [0.0, 0.5, 1.0, 3.0];
        let a = gp_predict(&model, &probes);
        let b = gp_predict(&back, &probes);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.mean.to_bits(), y.mean.to_bits());
            assert_eq!(x.variance.to_bits(), y.variance.to_bits());
        }
    }

    #[test]
    fn rejects_unknown_json_fields() {
        let text = r#"{"variance":1.0,"lengthscale":1.0,"noise":0.0,"xs":[0.0],"ys":[1.0],"extra":3}"#;
        assert!(TrainedGp::from_json(text).is_err());
    }

    #[test]
    fn rejects_mismatched_training_data() {
        assert!(GpTrainingData::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(GpTrainingData::new(vec![], vec![]).is_err());
        assert!(GpTrainingData::new(vec![f64::NAN], vec![1.0]).is_err());
    }
}
