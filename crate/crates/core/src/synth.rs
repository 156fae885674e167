//! Synthetic two-fidelity benchmark generators with known ground truth.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::damage_index::{DiDataset, DiKind, DiValue};
use crate::error::{Error, Result};
use crate::mfgp::MfTrainingData;
use crate::signal::Fidelity;

/// The classic one-dimensional two-fidelity test function, high-fidelity
/// branch: `(6x - 2)^2 * sin(12x - 4)`.
pub fn forrester_high(x: f64) -> f64 {
    let a = 6.0 * x - 2.0;
    a * a * (12.0 * x - 4.0).sin()
}

/// Low-fidelity companion: `0.5 * high(x) + 10 (x - 0.5) - 5`.
pub fn forrester_low(x: f64) -> f64 {
    0.5 * forrester_high(x) + 10.0 * (x - 0.5) - 5.0
}

/// Available synthetic function families. `u` below is the domain
/// coordinate rescaled to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum SynthFamily {
    /// Forrester pair; exercises a nontrivial fidelity relationship.
    Forrester,
    /// `low = sin(4u) + u`, `high = rho_star * low + offset`; the scale
    /// parameter is exactly recoverable.
    LinearRho { rho_star: f64, offset: f64 },
    /// A damage-index-shaped curve: small at u = 0, growing, with a local
    /// bump; the low-fidelity branch underestimates the bump.
    DiLike,
}

impl SynthFamily {
    fn unit(&self, x: f64, domain: (f64, f64)) -> f64 {
        (x - domain.0) / (domain.1 - domain.0)
    }

    pub fn high(&self, x: f64, domain: (f64, f64)) -> f64 {
        let u = self.unit(x, domain);
        match self {
            SynthFamily::Forrester => forrester_high(u),
            SynthFamily::LinearRho { rho_star, offset } => {
                rho_star * ((4.0 * u).sin() + u) + offset
            }
            SynthFamily::DiLike => {
                0.05 + 0.6 * u * u + 0.15 * (-((u - 0.55) / 0.12).powi(2)).exp()
            }
        }
    }

    pub fn low(&self, x: f64, domain: (f64, f64)) -> f64 {
        let u = self.unit(x, domain);
        match self {
            SynthFamily::Forrester => forrester_low(u),
            SynthFamily::LinearRho { .. } => (4.0 * u).sin() + u,
            SynthFamily::DiLike => 0.75 * (0.05 + 0.6 * u * u) + 0.1 * u,
        }
    }
}

fn default_noise() -> f64 {
    0.0
}
fn default_n_l1() -> usize {
    11
}
fn default_n_l2() -> usize {
    4
}
fn default_domain() -> (f64, f64) {
    (0.0, 1.0)
}

/// Generator settings. `noise_l2` is the observation noise *variance*
/// added to high-fidelity samples; low-fidelity samples are noiseless.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub family: SynthFamily,
    #[serde(default = "default_noise")]
    pub noise_l2: f64,
    #[serde(default = "default_n_l1")]
    pub n_l1: usize,
    #[serde(default = "default_n_l2")]
    pub n_l2: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_domain")]
    pub domain: (f64, f64),
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.n_l2 == 0 {
            return Err(Error::invalid("need at least one high-fidelity sample"));
        }
        if !(self.noise_l2.is_finite() && self.noise_l2 >= 0.0) {
            return Err(Error::invalid(format!(
                "noise variance must be nonnegative, got {}",
                self.noise_l2
            )));
        }
        let (a, b) = self.domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::invalid(format!("bad domain [{a}, {b}]")));
        }
        Ok(())
    }
}

/// Ground truth carried alongside generated data.
#[derive(Debug, Clone, Copy)]
pub struct TruthCurve {
    family: SynthFamily,
    domain: (f64, f64),
}

impl TruthCurve {
    pub fn high(&self, x: f64) -> f64 {
        self.family.high(x, self.domain)
    }

    pub fn low(&self, x: f64) -> f64 {
        self.family.low(x, self.domain)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }
}

/// Generated training data plus its ground truth.
#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub data: MfTrainingData,
    pub truth: TruthCurve,
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.5 * (a + b)],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// The four-point design conventionally used with the Forrester pair,
/// rescaled to the domain.
const CANONICAL_L2_UNIT: [f64; 4] = [0.0, 0.4, 0.6, 1.0];

/// Draw a synthetic dataset. High-fidelity inputs use the canonical
/// four-point design for the Forrester family when `n_l2 == 4`, otherwise
/// an even grid; low-fidelity inputs are always an even grid.
pub fn generate(config: &SynthConfig) -> Result<SynthDataset> {
    config.validate()?;
    let (a, b) = config.domain;
    let x_l2: Vec<f64> = if config.family == SynthFamily::Forrester && config.n_l2 == 4 {
        CANONICAL_L2_UNIT.iter().map(|u| a + (b - a) * u).collect()
    } else {
        linspace(a, b, config.n_l2)
    };
    let x_l1 = linspace(a, b, config.n_l1);

    let y_l1: Vec<f64> = x_l1
        .iter()
        .map(|&x| config.family.low(x, config.domain))
        .collect();
    let mut y_l2: Vec<f64> = x_l2
        .iter()
        .map(|&x| config.family.high(x, config.domain))
        .collect();
    if config.noise_l2 > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let dist = Normal::new(0.0, config.noise_l2.sqrt())
            .map_err(|e| Error::invalid(format!("noise distribution: {e}")))?;
        for y in &mut y_l2 {
            *y += dist.sample(&mut rng);
        }
    }

    Ok(SynthDataset {
        data: MfTrainingData::new(x_l1, y_l1, x_l2, y_l2)?,
        truth: TruthCurve {
            family: config.family,
            domain: config.domain,
        },
    })
}

/// Flatten generated training data into a damage-index table (path id
/// "synth", one realization per repeated state).
pub fn to_di_dataset(dataset: &SynthDataset, di_kind: DiKind) -> DiDataset {
    let mut points = Vec::new();
    let mut push = |xs: &[f64], ys: &[f64], fidelity: Fidelity| {
        let mut counts: std::collections::HashMap<u64, u32> = std::collections::HashMap::new();
        for (&x, &y) in xs.iter().zip(ys) {
            let c = counts.entry(x.to_bits()).or_insert(0);
            points.push(DiValue {
                state: x,
                value: y,
                fidelity,
                path_id: "synth".into(),
                realization: *c,
            });
            *c += 1;
        }
    };
    push(dataset.data.x_l1(), dataset.data.y_l1(), Fidelity::L1);
    push(dataset.data.x_l2(), dataset.data.y_l2(), Fidelity::L2);
    DiDataset { points, di_kind }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mfgp::{default_mf_bounds, mf_fit};
    use crate::optimizer::OptimizerConfig;
    use approx::assert_relative_eq;

    #[test]
    fn forrester_frozen_endpoint_values() {
        assert_relative_eq!(forrester_high(0.0), 3.0272100, epsilon = 1e-6);
        assert_relative_eq!(forrester_high(1.0), 15.8297319, epsilon = 1e-6);
        // Low branch at 0: 0.5*high(0) - 10.
        assert_relative_eq!(forrester_low(0.0), 0.5 * forrester_high(0.0) - 10.0, epsilon = 1e-12);
    }

    #[test]
    fn canonical_design_used_for_four_point_forrester() {
        let config = SynthConfig {
            family: SynthFamily::Forrester,
            noise_l2: 0.0,
            n_l1: 3,
            n_l2: 4,
            seed: 0,
            domain: (0.0, 1.0),
        };
        let ds = generate(&config).unwrap();
        assert_eq!(ds.data.x_l2(), &[0.0, 0.4, 0.6, 1.0]);

        let scaled = SynthConfig {
            domain: (2.0, 4.0),
            ..config.clone()
        };
        let ds = generate(&scaled).unwrap();
        assert_eq!(ds.data.x_l2(), &[2.0, 2.8, 3.2, 4.0]);

        let five = SynthConfig {
            n_l2: 5,
            ..config
        };
        let ds = generate(&five).unwrap();
        assert_eq!(ds.data.x_l2(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn zero_noise_reproduces_truth_exactly() {
        let config = SynthConfig {
            family: SynthFamily::Forrester,
            noise_l2: 0.0,
            n_l1: 5,
            n_l2: 4,
            seed: 7,
            domain: (0.0, 1.0),
        };
        let ds = generate(&config).unwrap();
        for (&x, &y) in ds.data.x_l2().iter().zip(ds.data.y_l2()) {
            assert_eq!(y, ds.truth.high(x));
        }
        for (&x, &y) in ds.data.x_l1().iter().zip(ds.data.y_l1()) {
            assert_eq!(y, ds.truth.low(x));
        }
    }

    #[test]
    fn noise_is_seeded_and_deterministic() {
        let config = SynthConfig {
            family: SynthFamily::Forrester,
            noise_l2: 0.01,
            n_l1: 5,
            n_l2: 6,
            seed: 42,
            domain: (0.0, 1.0),
        };
        let a = generate(&config).unwrap();
        let b = generate(&config).unwrap();
        assert_eq!(a.data.y_l2(), b.data.y_l2());
        assert!(a
            .data
            .y_l2()
            .iter()
            .zip(a.data.x_l2())
            .any(|(y, &x)| *y != a.truth.high(x)));

        let reseeded = SynthConfig {
            seed: 43,
            ..config
        };
        let c = generate(&reseeded).unwrap();
        assert_ne!(a.data.y_l2(), c.data.y_l2());
        // Low-fidelity branch stays noiseless.
        assert_eq!(a.data.y_l1(), c.data.y_l1());
    }

    #[test]
    fn linear_rho_scale_is_recovered() {
        // The high branch is an exact affine image of the low branch, so
        // the fitted scale parameter should land near its true value for
        // every seed.
        for seed in 0..5 {
            let config = SynthConfig {
                family: SynthFamily::LinearRho {
                    rho_star: 2.0,
                    offset: 1.0,
                },
                noise_l2: 1e-6,
                n_l1: 15,
                n_l2: 6,
                seed,
                domain: (0.0, 1.0),
            };
            let ds = generate(&config).unwrap();
            let bounds = default_mf_bounds(&ds.data, 1e-8).unwrap();
            let fit_config = OptimizerConfig {
                restarts: 4,
                max_evals: 400,
                ..OptimizerConfig::default()
            };
            let model = mf_fit(&ds.data, &bounds, 1e-8, &fit_config).unwrap();
            let rho = model.params().rho;
            assert!(
                (1.5..=2.5).contains(&rho),
                "seed {seed}: recovered scale {rho}"
            );
        }
    }

    #[test]
    fn di_like_curve_shape() {
        let t = TruthCurve {
            family: SynthFamily::DiLike,
            domain: (0.0, 1.0),
        };
        assert!(t.high(0.0) > 0.0);
        assert!(t.high(1.0) > t.high(0.0), "index grows with damage");
        // The low branch underestimates the bump region.
        assert!(t.low(0.55) < t.high(0.55));
    }

    #[test]
    fn di_table_export_assigns_realizations() {
        let config = SynthConfig {
            family: SynthFamily::DiLike,
            noise_l2: 0.0,
            n_l1: 2,
            n_l2: 3,
            seed: 0,
            domain: (0.0, 1.0),
        };
        let ds = generate(&config).unwrap();
        let table = to_di_dataset(&ds, DiKind::Rmsd);
        assert_eq!(table.points.len(), 5);
        assert!(table
            .points
            .iter()
            .all(|p| p.realization == 0), "distinct states, single realizations");
        let mf = table.to_mf_training().unwrap();
        assert_eq!(mf.n1(), 2);
        assert_eq!(mf.n2(), 3);
    }

    #[test]
    fn config_validation() {
        let bad_domain = SynthConfig {
            family: SynthFamily::Forrester,
            noise_l2: 0.0,
            n_l1: 2,
            n_l2: 2,
            seed: 0,
            domain: (1.0, 1.0),
        };
        assert!(generate(&bad_domain).is_err());
        let no_l2 = SynthConfig {
            n_l2: 0,
            domain: (0.0, 1.0),
            ..bad_domain
        };
        assert!(generate(&no_l2).is_err());
        let negative_noise = SynthConfig {
            noise_l2: -0.1,
            n_l2: 2,
            ..no_l2
        };
        assert!(generate(&negative_noise).is_err());
    }
}
