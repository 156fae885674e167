//! Load-differential compensation: predict how a baseline waveform deforms
//! under a quasi-static strain field, and calibrate that map from observed
//! amplitude ratios and time-of-arrival shifts.
//!
//! The model is affine in strain: the packet amplitude scales as
//! `1 + A*eps_actuator + B*eps_sensor`, and the packet arrival shifts by
//! `K * sum_i(d_i * eps_i)` seconds over the propagation segments.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Calibrated compensation coefficients plus the segment geometry they
/// were fit against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompensationModel {
    /// Amplitude sensitivity to actuator strain.
    pub a: f64,
    /// Amplitude sensitivity to sensor strain.
    pub b: f64,
    /// Arrival-shift sensitivity per unit strain-length (seconds per
    /// strain times length unit).
    pub k_phase: f64,
    /// Propagation segment lengths, in the same length unit as `k_phase`.
    pub segment_lengths: Vec<f64>,
}

impl CompensationModel {
    pub fn new(a: f64, b: f64, k_phase: f64, segment_lengths: Vec<f64>) -> Result<Self> {
        if ![a, b, k_phase].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("compensation coefficients must be finite"));
        }
        validate_segments(&segment_lengths)?;
        Ok(CompensationModel {
            a,
            b,
            k_phase,
            segment_lengths,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("compensation model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: CompensationModel =
            serde_json::from_str(text).map_err(|e| Error::data(format!("compensation model: {e}")))?;
        CompensationModel::new(model.a, model.b, model.k_phase, model.segment_lengths)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn validate_segments(segment_lengths: &[f64]) -> Result<()> {
    if segment_lengths.is_empty() {
        return Err(Error::invalid("at least one propagation segment is required"));
    }
    if !segment_lengths.iter().all(|d| d.is_finite() && *d > 0.0) {
        return Err(Error::invalid("segment lengths must be finite and positive"));
    }
    Ok(())
}

/// Strain field at one load level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrainState {
    pub eps_actuator: f64,
    pub eps_sensor: f64,
    /// Mean axial strain over each propagation segment.
    pub eps_segments: Vec<f64>,
}

impl StrainState {
    pub fn new(eps_actuator: f64, eps_sensor: f64, eps_segments: Vec<f64>) -> Result<Self> {
        if !eps_actuator.is_finite() || !eps_sensor.is_finite() {
            return Err(Error::invalid("transducer strains must be finite"));
        }
        if !eps_segments.iter().all(|e| e.is_finite()) {
            return Err(Error::invalid("segment strains must be finite"));
        }
        Ok(StrainState {
            eps_actuator,
            eps_sensor,
            eps_segments,
        })
    }

    fn check_segments(&self, model_segments: &[f64]) -> Result<()> {
        if self.eps_segments.len() != model_segments.len() {
            return Err(Error::invalid(format!(
                "strain state has {} segment strains but the model has {} segments",
                self.eps_segments.len(),
                model_segments.len()
            )));
        }
        Ok(())
    }
}

/// Predicted packet amplitude ratio relative to the unloaded baseline.
pub fn amplitude_ratio(model: &CompensationModel, strain: &StrainState) -> f64 {
    1.0 + model.a * strain.eps_actuator + model.b * strain.eps_sensor
}

/// Predicted arrival-time shift in seconds relative to the unloaded
/// baseline.
pub fn delta_toa(model: &CompensationModel, strain: &StrainState) -> Result<f64> {
    strain.check_segments(&model.segment_lengths)?;
    let weighted: f64 = model
        .segment_lengths
        .iter()
        .zip(&strain.eps_segments)
        .map(|(d, e)| d * e)
        .sum();
    Ok(model.k_phase * weighted)
}

const TAPS: usize = 8;
const TAPS_HALF: i64 = (TAPS / 2) as i64; // taps span j in [-3, 4]
const KAISER_BETA: f64 = 10.0;

/// Modified Bessel function of the first kind, order zero, by power series.
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        let p = std::f64::consts::PI * t;
        p.sin() / p
    }
}

/// Shift a waveform by a (possibly fractional) number of samples.
/// Positive shifts delay the signal. Edges are zero-padded; a shift of
/// exactly zero returns a bit-identical copy. Sub-sample shifts use an
/// 8-tap Kaiser-windowed sinc interpolator normalized to unit DC gain.
pub fn fractional_shift(signal: &Signal, shift_samples: f64) -> Result<Signal> {
    if !shift_samples.is_finite() {
        return Err(Error::invalid(format!(
            "shift must be finite, got {shift_samples}"
        )));
    }
    let n = signal.len();
    if shift_samples.abs() >= n as f64 {
        return Err(Error::invalid(format!(
            "shift of {shift_samples} samples moves the whole {n}-sample waveform out of frame"
        )));
    }
    let samples = signal.samples();
    let int_shift = shift_samples.floor();
    let frac = shift_samples - int_shift;
    let int_shift = int_shift as i64;

    let shifted: Vec<f64> = if frac == 0.0 {
        // Pure integer shift: move samples, zero-pad the exposed edge.
        (0..n as i64)
            .map(|i| {
                let src = i - int_shift;
                if (0..n as i64).contains(&src) {
                    samples[src as usize]
                } else {
                    0.0
                }
            })
            .collect()
    } else {
        // Output sample i reads the input at position i - shift, i.e. at
        // integer base i - int_shift - 1 plus fractional offset 1 - frac.
        let f = 1.0 - frac;
        let denom = bessel_i0(KAISER_BETA);
        let mut weights = [0.0; TAPS];
        let mut sum = 0.0;
        for (w, j) in weights.iter_mut().zip(1 - TAPS_HALF..=TAPS_HALF) {
            let t = f - j as f64;
            let x = t / TAPS_HALF as f64;
            *w = sinc(t) * bessel_i0(KAISER_BETA * (1.0 - x * x).max(0.0).sqrt()) / denom;
            sum += *w;
        }
        for w in &mut weights {
            *w /= sum;
        }
        let base_offset = int_shift + 1;
        (0..n as i64)
            .map(|i| {
                let base = i - base_offset;
                weights
                    .iter()
                    .zip(1 - TAPS_HALF..=TAPS_HALF)
                    .map(|(w, j)| {
                        let src = base + j;
                        if (0..n as i64).contains(&src) {
                            w * samples[src as usize]
                        } else {
                            0.0
                        }
                    })
                    .sum()
            })
            .collect()
    };
    Signal::new(shifted, signal.sample_rate(), signal.t0())
}

/// Synthesize the waveform expected under `strain` from an unloaded
/// baseline: scale the amplitude and apply the predicted arrival shift.
pub fn reconstruct(
    model: &CompensationModel,
    baseline: &Signal,
    strain: &StrainState,
) -> Result<Signal> {
    let ratio = amplitude_ratio(model, strain);
    let dt = delta_toa(model, strain)?;
    let shift = dt * baseline.sample_rate();
    let shifted = fractional_shift(baseline, shift)?;
    Signal::new(
        shifted.samples().iter().map(|s| ratio * s).collect(),
        baseline.sample_rate(),
        baseline.t0(),
    )
}

/// One calibration observation: the strain field and the measured
/// amplitude ratio and arrival shift (seconds) relative to baseline.
#[derive(Debug, Clone)]
pub struct CalibrationObservation {
    pub strain: StrainState,
    pub amplitude_ratio: f64,
    pub delta_toa: f64,
}

/// Calibration output: the fitted model and per-observation residuals.
#[derive(Debug, Clone)]
pub struct CalibrationResult {
    pub model: CompensationModel,
    /// Observed minus predicted amplitude ratio, per observation.
    pub amplitude_residuals: Vec<f64>,
    /// Observed minus predicted arrival shift, per observation.
    pub toa_residuals: Vec<f64>,
}

/// Least-squares calibration of (A, B) against `ratio - 1` and of K against
/// the strain-weighted segment sum. Needs at least two observations whose
/// transducer strains are not collinear, and at least one observation with
/// nonzero strain-weighted path length.
pub fn calibrate(
    segment_lengths: &[f64],
    observations: &[CalibrationObservation],
) -> Result<CalibrationResult> {
    validate_segments(segment_lengths)?;
    if observations.len() < 2 {
        return Err(Error::data(format!(
            "calibration needs at least 2 observations, got {}",
            observations.len()
        )));
    }
    for (i, obs) in observations.iter().enumerate() {
        obs.strain.check_segments(segment_lengths)?;
        if !obs.amplitude_ratio.is_finite() || !obs.delta_toa.is_finite() {
            return Err(Error::data(format!(
                "observation {i} has non-finite measurements"
            )));
        }
    }

    // (A, B) from ratio - 1 = A*eps_act + B*eps_sen.
    let m = observations.len();
    let design = DMatrix::from_fn(m, 2, |i, j| match j {
        0 => observations[i].strain.eps_actuator,
        _ => observations[i].strain.eps_sensor,
    });
    let target = DVector::from_fn(m, |i, _| observations[i].amplitude_ratio - 1.0);
    let gram = design.transpose() * &design;
    let scale = gram.diagonal().max();
    let det = gram[(0, 0)] * gram[(1, 1)] - gram[(0, 1)] * gram[(1, 0)];
    if !(scale > 0.0) || det.abs() < 1e-12 * scale * scale {
        return Err(Error::data(
            "transducer strains are collinear; amplitude coefficients are not identifiable",
        ));
    }
    let rhs = design.transpose() * &target;
    let ab = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::numerical("amplitude calibration system is singular"))?;

    // K from delta_toa = K * sum(d_i * eps_i), through the origin.
    let weighted: Vec<f64> = observations
        .iter()
        .map(|o| {
            segment_lengths
                .iter()
                .zip(&o.strain.eps_segments)
                .map(|(d, e)| d * e)
                .sum()
        })
        .collect();
    let ss: f64 = weighted.iter().map(|s| s * s).sum();
    if ss <= 0.0 {
        return Err(Error::data(
            "all observations have zero strain-weighted path length; K is not identifiable",
        ));
    }
    let st: f64 = weighted
        .iter()
        .zip(observations)
        .map(|(s, o)| s * o.delta_toa)
        .sum();
    let k_phase = st / ss;

    let model = CompensationModel::new(ab[0], ab[1], k_phase, segment_lengths.to_vec())?;
    let amplitude_residuals = observations
        .iter()
        .map(|o| o.amplitude_ratio - amplitude_ratio(&model, &o.strain))
        .collect();
    let toa_residuals = observations
        .iter()
        .zip(&weighted)
        .map(|(o, s)| o.delta_toa - model.k_phase * s)
        .collect();
    Ok(CalibrationResult {
        model,
        amplitude_residuals,
        toa_residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::tone_burst;
    use approx::assert_relative_eq;

    fn model() -> CompensationModel {
        CompensationModel::new(0.5, -0.2, 2.0e-6, vec![0.1, 0.2]).unwrap()
    }

    #[test]
    fn amplitude_ratio_is_affine_in_strain() {
        let s = StrainState::new(0.1, 0.2, vec![0.0, 0.0]).unwrap();
        assert_relative_eq!(amplitude_ratio(&model(), &s), 1.01, epsilon = 1e-15);
    }

    #[test]
    fn delta_toa_weights_segments_by_length() {
        let s = StrainState::new(0.0, 0.0, vec![0.1, 0.2]).unwrap();
        // 2e-6 * (0.1*0.1 + 0.2*0.2) = 1e-7
        assert_relative_eq!(delta_toa(&model(), &s).unwrap(), 1.0e-7, epsilon = 1e-20);
        let bad = StrainState::new(0.0, 0.0, vec![0.1]).unwrap();
        assert!(delta_toa(&model(), &bad).is_err());
    }

    #[test]
    fn zero_shift_is_bit_identical() {
        let s = tone_burst(100e3, 5, 24e6, 0.9).unwrap();
        let out = fractional_shift(&s, 0.0).unwrap();
        assert_eq!(out.samples(), s.samples());
    }

    #[test]
    fn integer_shift_moves_and_zero_pads() {
        let s = Signal::new(vec![1.0, 2.0, 3.0, 4.0, 5.0], 1e6, 0.0).unwrap();
        let out = fractional_shift(&s, 2.0).unwrap();
        assert_eq!(out.samples(), &[0.0, 0.0, 1.0, 2.0, 3.0]);
        let back = fractional_shift(&s, -2.0).unwrap();
        assert_eq!(back.samples(), &[3.0, 4.0, 5.0, 0.0, 0.0]);
    }

    #[test]
    fn sub_sample_round_trip_is_accurate() {
        let s = tone_burst(100e3, 5, 24e6, 1.0).unwrap();
        for frac in [0.1, 0.3, 0.5, 0.73] {
            let there = fractional_shift(&s, frac).unwrap();
            let back = fractional_shift(&there, -frac).unwrap();
            let max_err = s
                .samples()
                .iter()
                .zip(back.samples())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(max_err < 1e-6, "frac {frac}: round-trip error {max_err}");
        }
    }

    #[test]
    fn shift_preserves_dc_gain() {
        let s = Signal::new(vec![1.0; 64], 1e6, 0.0).unwrap();
        let out = fractional_shift(&s, 0.37).unwrap();
        // Interior samples of a constant signal stay exactly constant when
        // the taps sum to one.
        for &v in &out.samples()[8..56] {
            assert_relative_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn oversized_shift_is_rejected() {
        let s = Signal::new(vec![1.0, 2.0], 1e6, 0.0).unwrap();
        assert!(fractional_shift(&s, 2.0).is_err());
        assert!(fractional_shift(&s, -5.0).is_err());
    }

    #[test]
    fn reconstruct_scales_and_shifts() {
        let m = CompensationModel::new(0.5, 0.0, 1.0e-6, vec![1.0]).unwrap();
        let s = Signal::new(vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0], 1e6, 0.0).unwrap();
        // ratio = 1.1; shift = 1e-6 * 2.0 * 1e6 = 2 samples.
        let strain = StrainState::new(0.2, 0.0, vec![2.0]).unwrap();
        let out = reconstruct(&m, &s, &strain).unwrap();
        let expect = [0.0, 0.0, 0.0, 0.0, 1.1, 0.0];
        for (a, b) in out.samples().iter().zip(expect) {
            assert_relative_eq!(a, &b, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_strain_reconstruction_is_identity() {
        let m = model();
        let s = tone_burst(100e3, 5, 24e6, 1.0).unwrap();
        let strain = StrainState::new(0.0, 0.0, vec![0.0, 0.0]).unwrap();
        let out = reconstruct(&m, &s, &strain).unwrap();
        let max_err = s
            .samples()
            .iter()
            .zip(out.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_err < 1e-12, "identity error {max_err}");
    }

    #[test]
    fn calibration_recovers_exact_coefficients() {
        let truth = model();
        let strains = [
            StrainState::new(1.0e-4, 0.0, vec![1.0e-4, 0.0]).unwrap(),
            StrainState::new(0.0, 1.0e-4, vec![0.0, 1.0e-4]).unwrap(),
            StrainState::new(2.0e-4, -1.0e-4, vec![1.5e-4, 0.5e-4]).unwrap(),
            StrainState::new(-1.0e-4, 3.0e-4, vec![2.0e-4, 1.0e-4]).unwrap(),
            StrainState::new(5.0e-5, 5.0e-5, vec![5.0e-5, 5.0e-5]).unwrap(),
        ];
        let observations: Vec<CalibrationObservation> = strains
            .iter()
            .map(|s| CalibrationObservation {
                strain: s.clone(),
                amplitude_ratio: amplitude_ratio(&truth, s),
                delta_toa: delta_toa(&truth, s).unwrap(),
            })
            .collect();
        let result = calibrate(&truth.segment_lengths, &observations).unwrap();
        assert_relative_eq!(result.model.a, truth.a, epsilon = 1e-8);
        assert_relative_eq!(result.model.b, truth.b, epsilon = 1e-8);
        assert_relative_eq!(result.model.k_phase, truth.k_phase, epsilon = 1e-8);
        for r in result
            .amplitude_residuals
            .iter()
            .chain(&result.toa_residuals)
        {
            assert!(r.abs() < 1e-12, "residual {r}");
        }
    }

    #[test]
    fn negated_strain_round_trip_recovers_baseline() {
        // reconstruct with +strain then -strain is the identity to first
        // order in strain; second-order amplitude error (A*eps)^2 plus the
        // interpolation error stays far below 1e-6 at realistic strains.
        let m = model();
        let s = tone_burst(100e3, 5, 24e6, 1.0).unwrap();
        let strain = StrainState::new(1.0e-4, -2.0e-4, vec![3.0e-4, 1.5e-4]).unwrap();
        let negated = StrainState::new(-1.0e-4, 2.0e-4, vec![-3.0e-4, -1.5e-4]).unwrap();
        let loaded = reconstruct(&m, &s, &strain).unwrap();
        let back = reconstruct(&m, &loaded, &negated).unwrap();
        let max_err = s
            .samples()
            .iter()
            .zip(back.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_err < 1e-6, "round-trip error {max_err}");
    }

    #[test]
    fn noisy_calibration_stays_within_scaled_bound() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};

        // With additive measurement noise of sd sigma on the ratios, the
        // recovered coefficients should stay within a few sigma-scaled
        // standard errors of truth for every seed.
        let truth = model();
        let strains: Vec<StrainState> = (0..12)
            .map(|i| {
                let a = 1.0e-4 * ((i as f64 * 0.7).sin() + 1.5);
                let b = 1.0e-4 * ((i as f64 * 1.3).cos() - 0.4);
                StrainState::new(a, b, vec![a.abs(), (a + b).abs() + 1e-5]).unwrap()
            })
            .collect();
        let sigma = 1e-6;
        for seed in 0..100u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let dist = Normal::new(0.0, sigma).unwrap();
            let observations: Vec<CalibrationObservation> = strains
                .iter()
                .map(|s| CalibrationObservation {
                    strain: s.clone(),
                    amplitude_ratio: amplitude_ratio(&truth, s) + dist.sample(&mut rng),
                    delta_toa: delta_toa(&truth, s).unwrap() + 1e-3 * sigma * dist.sample(&mut rng),
                })
                .collect();
            let result = calibrate(&truth.segment_lengths, &observations).unwrap();
            // Strains are O(1e-4), so coefficient errors amplify the noise
            // by about 1e4; allow a generous multiple of that scale.
            let bound = 3.0 * sigma * 1e4 * 10.0;
            assert!(
                (result.model.a - truth.a).abs() < bound,
                "seed {seed}: a {} vs {}",
                result.model.a,
                truth.a
            );
            assert!(
                (result.model.b - truth.b).abs() < bound,
                "seed {seed}: b {} vs {}",
                result.model.b,
                truth.b
            );
        }
    }

    #[test]
    fn calibration_rejects_degenerate_designs() {
        // Collinear transducer strains: eps_sen = 2 * eps_act everywhere.
        let collinear: Vec<CalibrationObservation> = [1.0e-4, 2.0e-4, -1.0e-4]
            .iter()
            .map(|&e| CalibrationObservation {
                strain: StrainState::new(e, 2.0 * e, vec![e, e]).unwrap(),
                amplitude_ratio: 1.0,
                delta_toa: 0.0,
            })
            .collect();
        assert!(calibrate(&[0.1, 0.2], &collinear).is_err());

        // No observation strains the path: K unidentifiable.
        let unstrained: Vec<CalibrationObservation> = [
            StrainState::new(1.0e-4, 0.0, vec![0.0, 0.0]).unwrap(),
            StrainState::new(0.0, 1.0e-4, vec![0.0, 0.0]).unwrap(),
        ]
        .iter()
        .map(|s| CalibrationObservation {
            strain: s.clone(),
            amplitude_ratio: 1.0,
            delta_toa: 0.0,
        })
        .collect();
        assert!(calibrate(&[0.1, 0.2], &unstrained).is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let m = model();
        let text = m.to_json();
        assert!(text.contains("\"k_phase\""));
        assert!(text.contains("\"segment_lengths\""));
        let back = CompensationModel::from_json(&text).unwrap();
        assert_eq!(back, m);
        assert!(CompensationModel::from_json("{\"a\":1,\"b\":2,\"k_phase\":0,\"segment_lengths\":[1],\"x\":5}").is_err());
    }
}
