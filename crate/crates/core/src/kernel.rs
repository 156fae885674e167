//! Squared-exponential covariance on scalar inputs.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Output variance and lengthscale of a squared-exponential kernel.
/// Both must be finite and strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeKernelParams {
    pub variance: f64,
    pub lengthscale: f64,
}

impl SeKernelParams {
    pub fn new(variance: f64, lengthscale: f64) -> Result<Self> {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::invalid(format!(
                "kernel variance must be finite and positive, got {variance}"
            )));
        }
        if !(lengthscale.is_finite() && lengthscale > 0.0) {
            return Err(Error::invalid(format!(
                "kernel lengthscale must be finite and positive, got {lengthscale}"
            )));
        }
        Ok(SeKernelParams {
            variance,
            lengthscale,
        })
    }
}

/// k(x, x') = variance * exp(-(x - x')^2 / (2 * lengthscale^2)).
pub fn se_kernel(x: f64, x_prime: f64, params: &SeKernelParams) -> f64 {
    let d = x - x_prime;
    params.variance * (-d * d / (2.0 * params.lengthscale * params.lengthscale)).exp()
}

/// Cross-covariance matrix with entry (i, j) = k(xs[i], xs_prime[j]).
pub fn gram(xs: &[f64], xs_prime: &[f64], params: &SeKernelParams) -> DMatrix<f64> {
    DMatrix::from_fn(xs.len(), xs_prime.len(), |i, j| {
        se_kernel(xs[i], xs_prime[j], params)
    })
}
