//! Waveform containers, excitation synthesis, packet extraction, and
//! signal-set I/O.
//!
//! A signal set on disk is a directory with a `manifest.json` describing
//! sample rate, state metadata, and one waveform CSV per record. Waveform
//! CSVs carry the header `sample_index,amplitude` with LF line endings.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// L1 = low fidelity (simulation or physics-based reconstruction),
/// L2 = high fidelity (experiment).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Fidelity {
    L1,
    L2,
}

impl fmt::Display for Fidelity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fidelity::L1 => write!(f, "L1"),
            Fidelity::L2 => write!(f, "L2"),
        }
    }
}

impl FromStr for Fidelity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L1" => Ok(Fidelity::L1),
            "L2" => Ok(Fidelity::L2),
            other => Err(Error::data(format!("unknown fidelity tag {other:?}"))),
        }
    }
}

/// Uniformly sampled waveform with an absolute start time.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: f64,
    t0: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: f64, t0: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("signal must contain at least one sample"));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::invalid(format!(
                "sample rate must be finite and positive, got {sample_rate}"
            )));
        }
        if !t0.is_finite() {
            return Err(Error::invalid(format!("start time must be finite, got {t0}")));
        }
        if let Some((i, v)) = samples
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite())
        {
            return Err(Error::data(format!("non-finite sample {v} at index {i}")));
        }
        Ok(Signal {
            samples,
            sample_rate,
            t0,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }
}

/// Hann-windowed sinusoidal excitation: `n_peaks` carrier cycles under a
/// raised-cosine envelope, `round(n_peaks / center_freq * sample_rate)`
/// samples long. The sample rate must be at least 10x the carrier.
pub fn tone_burst(center_freq: f64, n_peaks: u32, sample_rate: f64, amplitude: f64) -> Result<Signal> {
    if !(center_freq.is_finite() && center_freq > 0.0) {
        return Err(Error::invalid(format!(
            "carrier frequency must be positive, got {center_freq}"
        )));
    }
    if n_peaks == 0 {
        return Err(Error::invalid("a tone burst needs at least one cycle"));
    }
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::invalid(format!(
            "sample rate must be positive, got {sample_rate}"
        )));
    }
    if sample_rate < 10.0 * center_freq {
        return Err(Error::invalid(format!(
            "sample rate {sample_rate} undersamples a {center_freq} Hz carrier (need >= 10x)"
        )));
    }
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::invalid(format!(
            "amplitude must be finite and nonnegative, got {amplitude}"
        )));
    }
    let n = (n_peaks as f64 / center_freq * sample_rate).round() as usize;
    let samples = (0..n)
        .map(|i| {
            let window = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos());
            let carrier = (2.0 * std::f64::consts::PI * center_freq * i as f64 / sample_rate).sin();
            amplitude * window * carrier
        })
        .collect();
    Signal::new(samples, sample_rate, 0.0)
}

/// Rectangular clip of `[window_start, window_start + window_len)` seconds
/// (absolute time). The window must lie inside the signal extent; edges snap
/// to the nearest sample, so re-extracting the same window is the identity.
pub fn extract_first_packet(signal: &Signal, window_start: f64, window_len: f64) -> Result<Signal> {
    if !(window_len.is_finite() && window_len > 0.0) {
        return Err(Error::invalid(format!(
            "window length must be positive, got {window_len}"
        )));
    }
    if !window_start.is_finite() {
        return Err(Error::invalid(format!(
            "window start must be finite, got {window_start}"
        )));
    }
    let fs = signal.sample_rate();
    let start = ((window_start - signal.t0()) * fs).round();
    let len = (window_len * fs).round();
    if len < 1.0 {
        return Err(Error::invalid(format!(
            "window of {window_len} s spans no samples at {fs} Hz"
        )));
    }
    if start < 0.0 || start + len > signal.len() as f64 {
        return Err(Error::invalid(format!(
            "window [{window_start}, {}) s lies outside the signal extent [{}, {}) s",
            window_start + window_len,
            signal.t0(),
            signal.t0() + signal.duration()
        )));
    }
    let (start, len) = (start as usize, len as usize);
    Signal::new(
        signal.samples()[start..start + len].to_vec(),
        fs,
        signal.t0() + start as f64 / fs,
    )
}

/// Raised-cosine ramp over `fraction` of the length at each end
/// (fraction in [0, 0.5]; 0 is the identity).
pub fn apply_cosine_taper(signal: &Signal, fraction: f64) -> Result<Signal> {
    if !(0.0..=0.5).contains(&fraction) || !fraction.is_finite() {
        return Err(Error::invalid(format!(
            "taper fraction must be in [0, 0.5], got {fraction}"
        )));
    }
    let n = signal.len();
    let m = (fraction * n as f64).round() as usize;
    if m == 0 {
        return Ok(signal.clone());
    }
    let mut samples = signal.samples().to_vec();
    for i in 0..m.min(n) {
        let w = 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / m as f64).cos());
        samples[i] *= w;
        samples[n - 1 - i] *= w;
    }
    Signal::new(samples, signal.sample_rate(), signal.t0())
}

/// Scale to unit energy (sum of squares = 1). All-zero input is an error.
pub fn normalize_energy(signal: &Signal) -> Result<Signal> {
    let e = signal.energy();
    if e <= 0.0 {
        return Err(Error::data("cannot energy-normalize an all-zero signal"));
    }
    let scale = 1.0 / e.sqrt();
    Signal::new(
        signal.samples().iter().map(|s| s * scale).collect(),
        signal.sample_rate(),
        signal.t0(),
    )
}

/// One waveform plus its provenance labels.
#[derive(Debug, Clone)]
pub struct SignalRecord {
    pub signal: Signal,
    pub path_id: String,
    pub state: f64,
    pub realization: u32,
    pub fidelity: Fidelity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestRecord {
    file: String,
    path_id: String,
    state: f64,
    realization: u32,
    fidelity: Fidelity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    sample_rate_hz: f64,
    #[serde(default)]
    baseline_state: Option<f64>,
    state_unit: String,
    records: Vec<ManifestRecord>,
}

/// A loaded signal-set directory.
#[derive(Debug, Clone)]
pub struct SignalSet {
    records: Vec<SignalRecord>,
    sample_rate_hz: f64,
    baseline_state: Option<f64>,
    state_unit: String,
}

impl SignalSet {
    pub fn new(
        records: Vec<SignalRecord>,
        sample_rate_hz: f64,
        baseline_state: Option<f64>,
        state_unit: impl Into<String>,
    ) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::data("signal set contains no records"));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::data(format!(
                "manifest sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        let mut seen = HashSet::new();
        for r in &records {
            if !r.state.is_finite() {
                return Err(Error::data(format!(
                    "record {}/{}/{} has non-finite state",
                    r.path_id, r.realization, r.fidelity
                )));
            }
            if (r.signal.sample_rate() - sample_rate_hz).abs() > 1e-9 * sample_rate_hz {
                return Err(Error::data(format!(
                    "record {} state {} mixes sample rates: {} vs manifest {}",
                    r.path_id,
                    r.state,
                    r.signal.sample_rate(),
                    sample_rate_hz
                )));
            }
            let key = (r.path_id.clone(), r.state.to_bits(), r.realization, r.fidelity);
            if !seen.insert(key) {
                return Err(Error::data(format!(
                    "duplicate record: path {} state {} realization {} fidelity {}",
                    r.path_id, r.state, r.realization, r.fidelity
                )));
            }
        }
        Ok(SignalSet {
            records,
            sample_rate_hz,
            baseline_state,
            state_unit: state_unit.into(),
        })
    }

    pub fn records(&self) -> &[SignalRecord] {
        &self.records
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn state_unit(&self) -> &str {
        &self.state_unit
    }

    /// The manifest's explicit baseline state, or the minimum state present.
    pub fn baseline_state(&self) -> f64 {
        self.baseline_state.unwrap_or_else(|| {
            self.records
                .iter()
                .map(|r| r.state)
                .fold(f64::INFINITY, f64::min)
        })
    }

    /// Sorted unique path identifiers.
    pub fn path_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.records.iter().map(|r| r.path_id.clone()).collect();
        ids.sort();
        ids.dedup();
        ids
    }
}

/// Write a waveform CSV (`sample_index,amplitude`, LF endings).
pub fn write_waveform_csv(path: &Path, signal: &Signal) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["sample_index", "amplitude"])
        .map_err(|e| csv_error(path, e))?;
    for (i, s) in signal.samples().iter().enumerate() {
        w.write_record([i.to_string(), s.to_string()])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Read a waveform CSV written by `write_waveform_csv`. Errors carry the
/// file name and the offending row number.
pub fn read_waveform_csv(path: &Path, sample_rate: f64) -> Result<Signal> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = r.headers().map_err(|e| csv_error(path, e))?;
    if headers != vec!["sample_index", "amplitude"] {
        return Err(Error::data(format!(
            "{}: expected header sample_index,amplitude, got {:?}",
            path.display(),
            headers
        )));
    }
    let mut samples = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = row + 2; // header is line 1
        if rec.len() != 2 {
            return Err(Error::data(format!(
                "{} line {line}: expected 2 fields, got {}",
                path.display(),
                rec.len()
            )));
        }
        let idx: usize = rec[0].parse().map_err(|_| {
            Error::data(format!(
                "{} line {line}: bad sample index {:?}",
                path.display(),
                &rec[0]
            ))
        })?;
        if idx != samples.len() {
            return Err(Error::data(format!(
                "{} line {line}: sample index {idx} out of order (expected {})",
                path.display(),
                samples.len()
            )));
        }
        let amp: f64 = rec[1].parse().map_err(|_| {
            Error::data(format!(
                "{} line {line}: bad amplitude {:?}",
                path.display(),
                &rec[1]
            ))
        })?;
        if !amp.is_finite() {
            return Err(Error::data(format!(
                "{} line {line}: non-finite amplitude {amp}",
                path.display()
            )));
        }
        samples.push(amp);
    }
    Signal::new(samples, sample_rate, 0.0)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::data(format!("{}: {other:?}", path.display())),
    }
}

/// Load a signal-set directory: `manifest.json` plus the waveform CSVs it
/// names (paths relative to `root`).
pub fn load_signal_set(root: &Path) -> Result<SignalSet> {
    let manifest_path = root.join("manifest.json");
    let text = std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: ManifestFile = serde_json::from_str(&text)
        .map_err(|e| Error::data(format!("{}: {e}", manifest_path.display())))?;
    if manifest.records.is_empty() {
        return Err(Error::data(format!(
            "{}: manifest lists no records",
            manifest_path.display()
        )));
    }
    if !(manifest.sample_rate_hz.is_finite() && manifest.sample_rate_hz > 0.0) {
        return Err(Error::data(format!(
            "{}: sample_rate_hz must be positive, got {}",
            manifest_path.display(),
            manifest.sample_rate_hz
        )));
    }
    let mut records = Vec::with_capacity(manifest.records.len());
    for m in &manifest.records {
        let file = root.join(&m.file);
        let signal = read_waveform_csv(&file, manifest.sample_rate_hz)?;
        records.push(SignalRecord {
            signal,
            path_id: m.path_id.clone(),
            state: m.state,
            realization: m.realization,
            fidelity: m.fidelity,
        });
    }
    SignalSet::new(
        records,
        manifest.sample_rate_hz,
        manifest.baseline_state,
        manifest.state_unit,
    )
}

/// Write a signal set as a directory: waveform CSVs named
/// `<path>_<fidelity>_s<state index>_r<realization>.csv` plus `manifest.json`.
pub fn save_signal_set(root: &Path, set: &SignalSet) -> Result<()> {
    std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let mut manifest = ManifestFile {
        sample_rate_hz: set.sample_rate_hz(),
        baseline_state: set.baseline_state,
        state_unit: set.state_unit.clone(),
        records: Vec::with_capacity(set.records.len()),
    };
    for (i, r) in set.records.iter().enumerate() {
        let file = format!(
            "{}_{}_i{:04}_r{}.csv",
            sanitize(&r.path_id),
            r.fidelity,
            i,
            r.realization
        );
        write_waveform_csv(&root.join(&file), &r.signal)?;
        manifest.records.push(ManifestRecord {
            file,
            path_id: r.path_id.clone(),
            state: r.state,
            realization: r.realization,
            fidelity: r.fidelity,
        });
    }
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let path = root.join("manifest.json");
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(())
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tone_burst_sample_count_and_peak() {
        let s = tone_burst(100e3, 5, 24e6, 1.0).unwrap();
        assert_eq!(s.len(), 1200);
        let peak = s.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(peak <= 1.0 + 1e-12, "peak {peak} exceeds amplitude");
        assert!(peak > 0.5, "windowed burst should come close to full scale");
        assert_eq!(s.samples()[0], 0.0);
    }

    #[test]
    fn tone_burst_zero_crossings_match_cycle_count() {
        // n carrier cycles means 2n - 1 interior sign changes.
        for n_peaks in [3u32, 5, 7] {
            let s = tone_burst(100e3, n_peaks, 24e6, 1.0).unwrap();
            let mut crossings = 0;
            let mut last = 0.0f64;
            for &v in s.samples() {
                if v != 0.0 {
                    if last != 0.0 && v.signum() != last.signum() {
                        crossings += 1;
                    }
                    last = v;
                }
            }
            assert_eq!(crossings, 2 * n_peaks - 1, "n_peaks = {n_peaks}");
        }
    }

    #[test]
    fn tone_burst_zero_amplitude_is_all_zero() {
        let s = tone_burst(100e3, 5, 24e6, 0.0).unwrap();
        assert!(s.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tone_burst_rejects_bad_inputs() {
        assert!(tone_burst(-1.0, 5, 24e6, 1.0).is_err());
        assert!(tone_burst(100e3, 0, 24e6, 1.0).is_err());
        assert!(tone_burst(100e3, 5, 500e3, 1.0).is_err(), "undersampled");
        assert!(tone_burst(100e3, 5, 24e6, -1.0).is_err());
    }

    #[test]
    fn packet_extraction_sample_window() {
        let s = Signal::new((0..1000).map(|i| i as f64).collect(), 1e6, 0.0).unwrap();
        let p = extract_first_packet(&s, 100e-6, 200e-6).unwrap();
        assert_eq!(p.len(), 200);
        assert_eq!(p.samples()[0], 100.0);
        assert_eq!(p.samples()[199], 299.0);
        assert_relative_eq!(p.t0(), 100e-6, epsilon = 1e-15);
    }

    #[test]
    fn packet_extraction_is_idempotent() {
        let s = tone_burst(100e3, 5, 24e6, 0.8).unwrap();
        let a = extract_first_packet(&s, 10e-6, 30e-6).unwrap();
        let b = extract_first_packet(&a, 10e-6, 30e-6).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn packet_window_must_fit() {
        let s = Signal::new(vec![0.0; 100], 1e6, 0.0).unwrap();
        assert!(extract_first_packet(&s, -10e-6, 20e-6).is_err());
        assert!(extract_first_packet(&s, 90e-6, 20e-6).is_err());
        assert!(extract_first_packet(&s, 10e-6, 0.0).is_err());
    }

    #[test]
    fn taper_preserves_interior_and_attenuates_edges() {
        let s = Signal::new(vec![1.0; 100], 1e6, 0.0).unwrap();
        let t = apply_cosine_taper(&s, 0.1).unwrap();
        assert_eq!(t.samples()[0], 0.0);
        assert_eq!(t.samples()[99], 0.0);
        assert!(t.samples()[5] < 1.0);
        for i in 10..90 {
            assert_eq!(t.samples()[i], 1.0);
        }
        let id = apply_cosine_taper(&s, 0.0).unwrap();
        assert_eq!(id, s);
        assert!(apply_cosine_taper(&s, 0.6).is_err());
    }

    #[test]
    fn energy_normalization() {
        let s = Signal::new(vec![3.0, 4.0], 1e6, 0.0).unwrap();
        let n = normalize_energy(&s).unwrap();
        assert_relative_eq!(n.energy(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(n.samples()[0], 0.6, epsilon = 1e-12);
        let z = Signal::new(vec![0.0, 0.0], 1e6, 0.0).unwrap();
        assert!(normalize_energy(&z).is_err());
    }

    #[test]
    fn waveform_csv_round_trip_lf_endings() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        let s = tone_burst(100e3, 3, 2e6, 0.7).unwrap();
        write_waveform_csv(&path, &s).unwrap();

        let bytes = std::fs::read(&path).unwrap();
        assert!(!bytes.contains(&b'\r'), "expected LF line endings");
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.starts_with("sample_index,amplitude\n"));

        let back = read_waveform_csv(&path, 2e6).unwrap();
        assert_eq!(back.samples(), s.samples());
    }

    #[test]
    fn waveform_csv_errors_name_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "sample_index,amplitude\n0,1.5\n1,oops\n").unwrap();
        let err = read_waveform_csv(&path, 1e6).unwrap_err().to_string();
        assert!(err.contains("line 3"), "error should cite the row: {err}");
        std::fs::write(&path, "wrong,header\n0,1\n").unwrap();
        assert!(read_waveform_csv(&path, 1e6).is_err());
    }

    fn fixture_set(dir: &Path) {
        let s0 = tone_burst(100e3, 3, 2e6, 1.0).unwrap();
        write_waveform_csv(&dir.join("a0.csv"), &s0).unwrap();
        write_waveform_csv(&dir.join("a1.csv"), &s0).unwrap();
        std::fs::write(
            dir.join("manifest.json"),
            r#"{
  "sample_rate_hz": 2e6,
  "state_unit": "mm",
  "records": [
    {"file": "a0.csv", "path_id": "p1", "state": 0.0, "realization": 0, "fidelity": "L2"},
    {"file": "a1.csv", "path_id": "p1", "state": 2.0, "realization": 0, "fidelity": "L2"}
  ]
}"#,
        )
        .unwrap();
    }

    #[test]
    fn signal_set_loads_and_defaults_baseline_to_min_state() {
        let dir = tempfile::tempdir().unwrap();
        fixture_set(dir.path());
        let set = load_signal_set(dir.path()).unwrap();
        assert_eq!(set.records().len(), 2);
        assert_eq!(set.baseline_state(), 0.0);
        assert_eq!(set.state_unit(), "mm");
        assert_eq!(set.path_ids(), vec!["p1".to_string()]);
    }

    #[test]
    fn signal_set_rejects_duplicates_and_unknown_fields() {
        let dir = tempfile::tempdir().unwrap();
        fixture_set(dir.path());
        // Duplicate key.
        std::fs::write(
            dir.path().join("manifest.json"),
            r#"{
  "sample_rate_hz": 2e6,
  "state_unit": "mm",
  "records": [
    {"file": "a0.csv", "path_id": "p1", "state": 0.0, "realization": 0, "fidelity": "L2"},
    {"file": "a1.csv", "path_id": "p1", "state": 0.0, "realization": 0, "fidelity": "L2"}
  ]
}"#,
        )
        .unwrap();
        assert!(load_signal_set(dir.path()).unwrap_err().to_string().contains("duplicate"));

        // Unknown manifest field.
        std::fs::write(
            dir.path().join("manifest.json"),
            r#"{"sample_rate_hz": 2e6, "state_unit": "mm", "surprise": 1, "records": []}"#,
        )
        .unwrap();
        assert!(load_signal_set(dir.path()).is_err());
    }

    #[test]
    fn signal_set_missing_file_is_named() {
        let dir = tempfile::tempdir().unwrap();
        fixture_set(dir.path());
        std::fs::remove_file(dir.path().join("a1.csv")).unwrap();
        let err = load_signal_set(dir.path()).unwrap_err().to_string();
        assert!(err.contains("a1.csv"), "error should name the file: {err}");
    }

    #[test]
    fn signal_set_save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = tone_burst(100e3, 3, 2e6, 1.0).unwrap();
        let set = SignalSet::new(
            vec![
                SignalRecord {
                    signal: s.clone(),
                    path_id: "p-2".into(),
                    state: 0.0,
                    realization: 0,
                    fidelity: Fidelity::L2,
                },
                SignalRecord {
                    signal: s,
                    path_id: "p-2".into(),
                    state: 4.0,
                    realization: 1,
                    fidelity: Fidelity::L1,
                },
            ],
            2e6,
            Some(0.0),
            "mm",
        )
        .unwrap();
        let root = dir.path().join("set");
        save_signal_set(&root, &set).unwrap();
        let back = load_signal_set(&root).unwrap();
        assert_eq!(back.records().len(), 2);
        assert_eq!(back.baseline_state(), 0.0);
        assert_eq!(back.records()[1].fidelity, Fidelity::L1);
        assert_eq!(
            back.records()[0].signal.samples(),
            set.records()[0].signal.samples()
        );
    }
}
