//! Result-directory management and the CSV/JSON emitters shared by the
//! commands.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use mfgpr_core::active_learning::IterationRecord;
use mfgpr_core::{Error, Result};

/// Create the run directory (`results/<command>/<timestamp>/` unless
/// overridden) and copy the config file into it for provenance.
pub fn prepare_out_dir(
    command: &str,
    config_path: &Path,
    out_override: Option<&Path>,
) -> Result<PathBuf> {
    let dir = match out_override {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            dir.to_path_buf()
        }
        None => {
            let stamp = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            let base = PathBuf::from("results").join(command);
            std::fs::create_dir_all(&base).map_err(|e| Error::io(&base, e))?;
            let mut attempt = 0u32;
            loop {
                let candidate = if attempt == 0 {
                    base.join(stamp.to_string())
                } else {
                    base.join(format!("{stamp}_{attempt}"))
                };
                match std::fs::create_dir(&candidate) {
                    Ok(()) => break candidate,
                    Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists && attempt < 1000 => {
                        attempt += 1;
                    }
                    Err(e) => return Err(Error::io(&candidate, e)),
                }
            }
        }
    };
    let copy = dir.join("config.json");
    std::fs::copy(config_path, &copy).map_err(|e| Error::io(&copy, e))?;
    Ok(dir)
}

/// One row of the model-comparison table.
#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub model: String,
    pub n_exp_sets: usize,
    pub n_sim_points: usize,
    pub rmse: f64,
    pub r2: f64,
    pub fit_seconds: f64,
    pub predict_seconds: f64,
}

pub fn write_metrics_csv(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    w.write_record([
        "model",
        "n_exp_sets",
        "n_sim_points",
        "rmse",
        "r2",
        "fit_seconds",
        "predict_seconds",
    ])
    .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    for r in rows {
        w.write_record([
            r.model.clone(),
            r.n_exp_sets.to_string(),
            r.n_sim_points.to_string(),
            r.rmse.to_string(),
            r.r2.to_string(),
            r.fit_seconds.to_string(),
            r.predict_seconds.to_string(),
        ])
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// One predictive-curve sample (mean with a 95% interval).
#[derive(Debug, Clone)]
pub struct CurveRow {
    pub model: String,
    pub step: usize,
    pub state: f64,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn write_curves_csv(path: &Path, rows: &[CurveRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    w.write_record(["model", "step", "state", "mean", "lower", "upper"])
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    for r in rows {
        w.write_record([
            r.model.clone(),
            r.step.to_string(),
            r.state.to_string(),
            r.mean.to_string(),
            r.lower.to_string(),
            r.upper.to_string(),
        ])
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Sequential-design trend export: `iteration,selected_state,rmse,r2`.
pub fn write_history_csv(path: &Path, history: &[IterationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    w.write_record(["iteration", "selected_state", "rmse", "r2"])
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    for rec in history {
        w.write_record([
            rec.iteration.to_string(),
            rec.selected_state.to_string(),
            rec.rmse.to_string(),
            rec.r_squared.to_string(),
        ])
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_dir_copies_config_and_respects_override() {
        let dir = tempfile::tempdir().unwrap();
        let config = dir.path().join("c.json");
        std::fs::write(&config, "{}").unwrap();
        let out = dir.path().join("run");
        let got = prepare_out_dir("task1", &config, Some(&out)).unwrap();
        assert_eq!(got, out);
        assert_eq!(std::fs::read_to_string(out.join("config.json")).unwrap(), "{}");
    }

    #[test]
    fn metrics_and_curves_headers() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("metrics.csv");
        write_metrics_csv(
            &m,
            &[MetricsRow {
                model: "gp".into(),
                n_exp_sets: 2,
                n_sim_points: 0,
                rmse: 0.5,
                r2: 0.9,
                fit_seconds: 0.01,
                predict_seconds: 0.001,
            }],
        )
        .unwrap();
        let text = std::fs::read_to_string(&m).unwrap();
        assert!(text.starts_with("model,n_exp_sets,n_sim_points,rmse,r2,fit_seconds,predict_seconds\n"));
        assert!(text.contains("gp,2,0,0.5,0.9,"));

        let c = dir.path().join("curves.csv");
        write_curves_csv(
            &c,
            &[CurveRow {
                model: "mfgp".into(),
                step: 1,
                state: 0.25,
                mean: 1.5,
                lower: 0.5,
                upper: 2.5,
            }],
        )
        .unwrap();
        let text = std::fs::read_to_string(&c).unwrap();
        assert!(text.starts_with("model,step,state,mean,lower,upper\n"));
    }
}
