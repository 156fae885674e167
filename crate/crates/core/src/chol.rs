//! Cholesky factorization with escalating diagonal jitter.

use nalgebra::{DMatrix, Dyn};

use crate::error::{Error, Result};

/// Initial jitter, as a fraction of the mean diagonal.
const JITTER_START: f64 = 1e-10;
/// Escalation factor applied on each failed attempt.
const JITTER_GROWTH: f64 = 10.0;
/// Abort threshold, as a fraction of the mean diagonal.
const JITTER_LIMIT: f64 = 1e-4;

pub(crate) struct JitteredCholesky {
    pub factor: nalgebra::Cholesky<f64, Dyn>,
    /// Diagonal jitter that was actually added (0.0 when none was needed).
    pub jitter: f64,
}

impl JitteredCholesky {
    /// ln |K| from the factor diagonal.
    pub fn log_det(&self) -> f64 {
        let l = self.factor.l_dirty();
        let mut s = 0.0;
        for i in 0..l.nrows() {
            s += l[(i, i)].ln();
        }
        2.0 * s
    }
}

/// Factor a symmetric PSD matrix, adding diagonal jitter only if the plain
/// factorization fails. Jitter starts at 1e-10 of the mean diagonal and
/// grows tenfold per attempt; past 1e-4 of the mean diagonal the matrix is
/// reported as numerically indefinite.
pub(crate) fn cholesky_with_jitter(k: &DMatrix<f64>) -> Result<JitteredCholesky> {
    debug_assert_eq!(k.nrows(), k.ncols());
    if let Some(factor) = k.clone().cholesky() {
        return Ok(JitteredCholesky { factor, jitter: 0.0 });
    }

    let n = k.nrows();
    let mean_diag = k.diagonal().sum() / n as f64;
    if !(mean_diag.is_finite() && mean_diag > 0.0) {
        return Err(Error::numerical(format!(
            "covariance diagonal mean {mean_diag} leaves no room for jitter"
        )));
    }

    let mut jitter = JITTER_START * mean_diag;
    let limit = JITTER_LIMIT * mean_diag;
    while jitter <= limit {
        let mut kj = k.clone();
        for i in 0..n {
            kj[(i, i)] += jitter;
        }
        if let Some(factor) = kj.cholesky() {
            return Ok(JitteredCholesky { factor, jitter });
        }
        jitter *= JITTER_GROWTH;
    }
    Err(Error::numerical(format!(
        "covariance matrix is not positive definite even with jitter {limit:.3e}"
    )))
}
