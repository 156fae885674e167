//! Derivative-free minimization over a box, used for hyperparameter fitting.
//!
//! Nelder-Mead with candidate clamping, run in a transformed space: positive
//! scale parameters (variances, lengthscales) optimize in log space, signed
//! ones (the fidelity scale factor) stay linear. Multi-start with a seeded
//! generator keeps results bitwise reproducible for a fixed seed and config.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    /// Optimize ln(v); requires strictly positive bounds.
    Log,
    Linear,
}

/// Per-dimension bounds plus the space each dimension optimizes in.
#[derive(Debug, Clone)]
pub struct ParameterBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
    transforms: Vec<Transform>,
}

impl ParameterBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, transforms: Vec<Transform>) -> Result<Self> {
        if lower.len() != upper.len() || lower.len() != transforms.len() {
            return Err(Error::invalid(format!(
                "parameter box arms must have equal length, got {}/{}/{}",
                lower.len(),
                upper.len(),
                transforms.len()
            )));
        }
        if lower.is_empty() {
            return Err(Error::invalid("parameter box must have at least one dimension"));
        }
        for i in 0..lower.len() {
            let (lo, hi) = (lower[i], upper[i]);
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::invalid(format!(
                    "parameter box bounds must be finite, dimension {i} is [{lo}, {hi}]"
                )));
            }
            if lo > hi {
                return Err(Error::invalid(format!(
                    "parameter box lower bound exceeds upper bound in dimension {i}: [{lo}, {hi}]"
                )));
            }
            if transforms[i] == Transform::Log && lo <= 0.0 {
                return Err(Error::invalid(format!(
                    "log-transformed dimension {i} needs a positive lower bound, got {lo}"
                )));
            }
        }
        Ok(ParameterBox {
            lower,
            upper,
            transforms,
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn to_internal(&self, natural: &[f64]) -> Vec<f64> {
        natural
            .iter()
            .zip(&self.transforms)
            .map(|(&v, t)| match t {
                Transform::Log => v.ln(),
                Transform::Linear => v,
            })
            .collect()
    }

    fn from_internal(&self, internal: &[f64]) -> Vec<f64> {
        internal
            .iter()
            .zip(&self.transforms)
            .map(|(&z, t)| match t {
                Transform::Log => z.exp(),
                Transform::Linear => z,
            })
            .collect()
    }

    fn internal_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (self.to_internal(&self.lower), self.to_internal(&self.upper))
    }

    /// Clamp a natural-space point into the box.
    pub fn clamp(&self, point: &mut [f64]) {
        for i in 0..self.dim() {
            point[i] = point[i].clamp(self.lower[i], self.upper[i]);
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    /// Independent starts; the first is the box center (or the caller's
    /// initial guess), the rest are drawn uniformly in transformed space.
    pub restarts: usize,
    /// Objective-evaluation budget per restart.
    pub max_evals: usize,
    /// Convergence threshold on the simplex function-value spread.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 10,
            max_evals: 600,
            tolerance: 1e-9,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    /// Minimizer in natural (untransformed) space, inside the box.
    pub argmin: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Relative share of the box width used for the initial simplex offsets.
const SIMPLEX_SCALE: f64 = 0.05;

/// Minimize `objective` over `bounds`. Non-finite objective values are
/// treated as +inf. `initial` seeds the first start (clamped into the box);
/// when absent the transformed box center is used. Ties across restarts
/// resolve to the lowest restart index.
pub fn minimize(
    objective: impl Fn(&[f64]) -> f64,
    bounds: &ParameterBox,
    config: &OptimizerConfig,
    initial: Option<&[f64]>,
) -> Result<MinimizeResult> {
    if config.restarts == 0 {
        return Err(Error::invalid("optimizer needs at least one restart"));
    }
    if let Some(init) = initial {
        if init.len() != bounds.dim() {
            return Err(Error::invalid(format!(
                "initial guess has dimension {}, parameter box has {}",
                init.len(),
                bounds.dim()
            )));
        }
    }

    let (ilo, ihi) = bounds.internal_bounds();
    let n = bounds.dim();
    let total_evals = std::cell::Cell::new(0usize);
    let eval = |z: &[f64]| -> f64 {
        total_evals.set(total_evals.get() + 1);
        let v = objective(&bounds.from_internal(z));
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let center: Vec<f64> = (0..n).map(|i| 0.5 * (ilo[i] + ihi[i])).collect();
    let free: Vec<usize> = (0..n).filter(|&i| ihi[i] > ilo[i]).collect();

    // Fully collapsed box: the only feasible point is the box itself.
    if free.is_empty() {
        let value = eval(&center);
        if !value.is_finite() {
            return Err(Error::numerical(
                "objective is not finite at the collapsed parameter box",
            ));
        }
        return Ok(MinimizeResult {
            argmin: bounds.lower.clone(),
            value,
            evals: total_evals.get(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(config.restarts);
    let first = match initial {
        Some(init) => {
            let mut p = init.to_vec();
            bounds.clamp(&mut p);
            bounds.to_internal(&p)
        }
        None => center.clone(),
    };
    starts.push(first);
    for _ in 1..config.restarts {
        let mut s = center.clone();
        for &i in &free {
            s[i] = rng.gen_range(ilo[i]..=ihi[i]);
        }
        starts.push(s);
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in &starts {
        let (value, point) = nelder_mead(
            &eval,
            start,
            &ilo,
            &ihi,
            &free,
            config.max_evals,
            config.tolerance,
        );
        let better = match &best {
            None => true,
            Some((bv, _)) => value < *bv,
        };
        if better {
            best = Some((value, point));
        }
    }

    let (value, argmin_internal) = best.expect("at least one restart ran");
    if !value.is_finite() {
        return Err(Error::numerical(
            "objective was not finite at any optimizer start",
        ));
    }
    let mut argmin = bounds.from_internal(&argmin_internal);
    // A coordinate pinned to an internal bound is the bound: report the
    // natural-space bound exactly rather than its transform round trip.
    for i in 0..n {
        if argmin_internal[i] <= ilo[i] {
            argmin[i] = bounds.lower[i];
        } else if argmin_internal[i] >= ihi[i] {
            argmin[i] = bounds.upper[i];
        }
    }
    bounds.clamp(&mut argmin);
    Ok(MinimizeResult {
        argmin,
        value,
        evals: total_evals.get(),
    })
}

fn clamp_point(z: &mut [f64], ilo: &[f64], ihi: &[f64]) {
    for i in 0..z.len() {
        z[i] = z[i].clamp(ilo[i], ihi[i]);
    }
}

/// One bounded Nelder-Mead run in internal space. Returns the best vertex
/// seen. Fixed (zero-width) dimensions never move.
#[allow(clippy::too_many_arguments)]
fn nelder_mead(
    eval: &impl Fn(&[f64]) -> f64,
    start: &[f64],
    ilo: &[f64],
    ihi: &[f64],
    free: &[usize],
    max_evals: usize,
    tolerance: f64,
) -> (f64, Vec<f64>) {
    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const BETA: f64 = 0.5; // contraction
    const DELTA: f64 = 0.5; // shrink

    let used = std::cell::Cell::new(0usize);
    let eval_counted = |z: &[f64]| -> f64 {
        used.set(used.get() + 1);
        eval(z)
    };

    // Initial simplex: start plus one vertex per free dimension, offset by
    // SIMPLEX_SCALE of the box width (flipped inward at the upper bound).
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(free.len() + 1);
    let f0 = eval_counted(start);
    simplex.push((f0, start.to_vec()));
    for &i in free {
        let width = ihi[i] - ilo[i];
        let h = SIMPLEX_SCALE * width;
        let mut v = start.to_vec();
        v[i] = if start[i] + h <= ihi[i] {
            start[i] + h
        } else {
            start[i] - h
        };
        let fv = eval_counted(&v);
        simplex.push((fv, v));
    }

    let order = |s: &mut Vec<(f64, Vec<f64>)>| {
        s.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("values sanitized to non-NaN"));
    };
    order(&mut simplex);

    while used.get() < max_evals {
        // Converged when both the value spread and the simplex diameter are
        // small. The diameter test guards against a simplex straddling the
        // optimum symmetrically, where values alone look converged.
        let spread = simplex.last().unwrap().0 - simplex[0].0;
        if spread.is_finite() && spread <= tolerance * (1.0 + simplex[0].0.abs()) {
            let best_v = &simplex[0].1;
            let dtol = tolerance.sqrt();
            let tight = free.iter().all(|&i| {
                let w = ihi[i] - ilo[i];
                simplex
                    .iter()
                    .all(|(_, v)| (v[i] - best_v[i]).abs() <= dtol * w)
            });
            if tight {
                break;
            }
        }

        let worst = simplex.len() - 1;
        // Centroid of all vertices but the worst.
        let mut centroid = vec![0.0; start.len()];
        for (_, v) in &simplex[..worst] {
            for (c, &vi) in centroid.iter_mut().zip(v) {
                *c += vi;
            }
        }
        for c in centroid.iter_mut() {
            *c /= worst as f64;
        }

        let towards = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = from
                .iter()
                .zip(to)
                .map(|(&a, &b)| a + t * (b - a))
                .collect();
            clamp_point(&mut p, ilo, ihi);
            p
        };

        let xw = simplex[worst].1.clone();
        let fw = simplex[worst].0;
        let f_best = simplex[0].0;
        let f_second = simplex[worst - 1].0;

        // Reflect the worst vertex through the centroid.
        let xr = towards(&centroid, &xw, -ALPHA);
        let fr = eval_counted(&xr);

        if fr < f_best {
            let xe = towards(&centroid, &xw, -GAMMA);
            let fe = eval_counted(&xe);
            simplex[worst] = if fe < fr { (fe, xe) } else { (fr, xr) };
        } else if fr < f_second {
            simplex[worst] = (fr, xr);
        } else {
            let (fc, xc) = if fr < fw {
                let x = towards(&centroid, &xr, BETA);
                let f = eval_counted(&x);
                (f, x)
            } else {
                let x = towards(&centroid, &xw, BETA);
                let f = eval_counted(&x);
                (f, x)
            };
            if fc < fw.min(fr) {
                simplex[worst] = (fc, xc);
            } else {
                // Shrink everything towards the best vertex.
                let xb = simplex[0].1.clone();
                for k in 1..simplex.len() {
                    let x = towards(&xb, &simplex[k].1, DELTA);
                    let f = eval_counted(&x);
                    simplex[k] = (f, x);
                    if used.get() >= max_evals {
                        break;
                    }
                }
            }
        }
        order(&mut simplex);
    }

    let (f, x) = simplex.swap_remove(0);
    (f, x)
}
