//! Scalar damage indices computed from baseline/current waveform pairs, and
//! the tabular dataset they form.
//!
//! Both indices operate on energy-normalized copies of the inputs, so they
//! respond to waveform shape, not drive level.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mfgp::MfTrainingData;
use crate::signal::{normalize_energy, Fidelity, Signal, SignalSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiKind {
    /// Residual energy after projecting the current waveform onto the
    /// baseline: 1 - cos^2(angle between them). Range [0, 1].
    Janapati,
    /// Root-mean-square deviation between the normalized waveforms.
    /// Range [0, 2/sqrt(N)].
    Rmsd,
}

impl fmt::Display for DiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiKind::Janapati => write!(f, "janapati"),
            DiKind::Rmsd => write!(f, "rmsd"),
        }
    }
}

impl FromStr for DiKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "janapati" => Ok(DiKind::Janapati),
            "rmsd" => Ok(DiKind::Rmsd),
            other => Err(Error::data(format!("unknown damage index kind {other:?}"))),
        }
    }
}

fn normalized_pair(baseline: &Signal, current: &Signal) -> Result<(Signal, Signal)> {
    if baseline.len() != current.len() {
        return Err(Error::data(format!(
            "waveform lengths differ: baseline {} vs current {}",
            baseline.len(),
            current.len()
        )));
    }
    if baseline.len() < 2 {
        return Err(Error::data("damage index needs at least 2 samples"));
    }
    Ok((normalize_energy(baseline)?, normalize_energy(current)?))
}

/// Residual energy of the current waveform after removing its projection
/// onto the baseline. Equals 1 - cos^2 of the angle between the two
/// waveforms, so it is invariant to the scale of either input.
pub fn di_janapati(baseline: &Signal, current: &Signal) -> Result<f64> {
    let (b, c) = normalized_pair(baseline, current)?;
    let dot: f64 = b
        .samples()
        .iter()
        .zip(c.samples())
        .map(|(x, y)| x * y)
        .sum();
    // Unit-energy inputs: residual energy is exactly 1 - dot^2.
    Ok((1.0 - dot * dot).max(0.0))
}

/// Root-mean-square deviation between the energy-normalized waveforms.
pub fn di_rmsd(baseline: &Signal, current: &Signal) -> Result<f64> {
    let (b, c) = normalized_pair(baseline, current)?;
    let n = b.len() as f64;
    let ss: f64 = b
        .samples()
        .iter()
        .zip(c.samples())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((ss / n).sqrt())
}

pub fn compute_di(kind: DiKind, baseline: &Signal, current: &Signal) -> Result<f64> {
    match kind {
        DiKind::Janapati => di_janapati(baseline, current),
        DiKind::Rmsd => di_rmsd(baseline, current),
    }
}

/// One damage-index observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DiValue {
    pub state: f64,
    pub value: f64,
    pub fidelity: Fidelity,
    pub path_id: String,
    pub realization: u32,
}

/// A damage-index table plus the index definition that produced it.
#[derive(Debug, Clone)]
pub struct DiDataset {
    pub points: Vec<DiValue>,
    pub di_kind: DiKind,
}

impl DiDataset {
    /// Split into multi-fidelity training data: L1 points feed the
    /// low-fidelity block, L2 the high-fidelity block. At least one L2
    /// point is required.
    pub fn to_mf_training(&self) -> Result<MfTrainingData> {
        let mut x_l1 = Vec::new();
        let mut y_l1 = Vec::new();
        let mut x_l2 = Vec::new();
        let mut y_l2 = Vec::new();
        for p in &self.points {
            match p.fidelity {
                Fidelity::L1 => {
                    x_l1.push(p.state);
                    y_l1.push(p.value);
                }
                Fidelity::L2 => {
                    x_l2.push(p.state);
                    y_l2.push(p.value);
                }
            }
        }
        if x_l2.is_empty() {
            return Err(Error::data(
                "damage index dataset has no L2 points to train on",
            ));
        }
        MfTrainingData::new(x_l1, y_l1, x_l2, y_l2)
    }

    /// (state, value) pairs for one fidelity, in table order.
    pub fn fidelity_points(&self, fidelity: Fidelity) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter(|p| p.fidelity == fidelity)
            .map(|p| (p.state, p.value))
            .collect()
    }
}

/// Compute a damage index for every record of a signal set.
///
/// The reference for each (path, fidelity) group is realization 0 at the
/// set's baseline state; that record itself gets index 0 by definition.
/// A group without its reference record is an error.
pub fn build_di_dataset(set: &SignalSet, kind: DiKind) -> Result<DiDataset> {
    let baseline_state = set.baseline_state();
    let mut points = Vec::with_capacity(set.records().len());
    for r in set.records() {
        let reference = set
            .records()
            .iter()
            .find(|b| {
                b.path_id == r.path_id
                    && b.fidelity == r.fidelity
                    && b.state == baseline_state
                    && b.realization == 0
            })
            .ok_or_else(|| {
                Error::data(format!(
                    "no baseline record (state {baseline_state}, realization 0) \
                     for path {} fidelity {}",
                    r.path_id, r.fidelity
                ))
            })?;
        // The reference record scores 0 by definition, not via arithmetic.
        let value = if std::ptr::eq(reference, r) {
            0.0
        } else {
            compute_di(kind, &reference.signal, &r.signal)?
        };
        points.push(DiValue {
            state: r.state,
            value,
            fidelity: r.fidelity,
            path_id: r.path_id.clone(),
            realization: r.realization,
        });
    }
    Ok(DiDataset {
        points,
        di_kind: kind,
    })
}

/// Write a damage-index table (`state,value,fidelity,path_id,realization`).
pub fn write_di_csv(path: &Path, dataset: &DiDataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    w.write_record(["state", "value", "fidelity", "path_id", "realization"])
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    for p in &dataset.points {
        w.write_record([
            p.state.to_string(),
            p.value.to_string(),
            p.fidelity.to_string(),
            p.path_id.clone(),
            p.realization.to_string(),
        ])
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Read a damage-index table written by `write_di_csv`. The index kind is
/// not stored in the file and must be supplied.
pub fn read_di_csv(path: &Path, kind: DiKind) -> Result<DiDataset> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::data(format!("{}: {other:?}", path.display())),
    })?;
    let headers = r.headers().map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    if headers != vec!["state", "value", "fidelity", "path_id", "realization"] {
        return Err(Error::data(format!(
            "{}: expected header state,value,fidelity,path_id,realization, got {:?}",
            path.display(),
            headers
        )));
    }
    let mut points = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let line = row + 2;
        let rec = rec.map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
        if rec.len() != 5 {
            return Err(Error::data(format!(
                "{} line {line}: expected 5 fields, got {}",
                path.display(),
                rec.len()
            )));
        }
        let field = |i: usize, name: &str| -> Result<f64> {
            let v: f64 = rec[i].parse().map_err(|_| {
                Error::data(format!(
                    "{} line {line}: bad {name} {:?}",
                    path.display(),
                    &rec[i]
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::data(format!(
                    "{} line {line}: non-finite {name} {v}",
                    path.display()
                )));
            }
            Ok(v)
        };
        let state = field(0, "state")?;
        let value = field(1, "value")?;
        let fidelity: Fidelity = rec[2].parse().map_err(|_| {
            Error::data(format!(
                "{} line {line}: bad fidelity {:?}",
                path.display(),
                &rec[2]
            ))
        })?;
        let realization: u32 = rec[4].parse().map_err(|_| {
            Error::data(format!(
                "{} line {line}: bad realization {:?}",
                path.display(),
                &rec[4]
            ))
        })?;
        points.push(DiValue {
            state,
            value,
            fidelity,
            path_id: rec[3].to_string(),
            realization,
        });
    }
    if points.is_empty() {
        return Err(Error::data(format!(
            "{}: damage index table is empty",
            path.display()
        )));
    }
    Ok(DiDataset {
        points,
        di_kind: kind,
    })
}
