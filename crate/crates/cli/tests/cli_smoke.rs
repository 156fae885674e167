//! End-to-end runs of the `mfgpr` binary: every subcommand once, plus the
//! exit-code contract.

use std::path::Path;
use std::process::{Command, Output};

use mfgpr_core::load_compensation::CompensationModel;
use mfgpr_core::signal::{
    load_signal_set, save_signal_set, tone_burst, Fidelity, SignalRecord, SignalSet,
};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mfgpr")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary should launch")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr),
    );
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

/// A small two-path signal set: bursts whose amplitude decays with state.
fn demo_signal_set() -> SignalSet {
    let fs = 24e6;
    let mut records = Vec::new();
    for path_id in ["p1-2", "p3-4"] {
        for (state, fidelity) in [
            (0.0, Fidelity::L2),
            (10.0, Fidelity::L2),
            (20.0, Fidelity::L2),
            (0.0, Fidelity::L1),
            (5.0, Fidelity::L1),
            (15.0, Fidelity::L1),
        ] {
            for realization in 0..2u32 {
                let amp = 1.0 - 0.01 * state - 0.001 * realization as f64;
                let signal = tone_burst(100e3, 5, fs, amp).unwrap();
                records.push(SignalRecord {
                    signal,
                    path_id: path_id.to_string(),
                    state,
                    realization,
                    fidelity,
                });
            }
        }
    }
    SignalSet::new(records, fs, Some(0.0), "percent").unwrap()
}

#[test]
fn synth_writes_table_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "synth.json",
        r#"{"synth": {"family": {"name": "forrester"}, "noise_l2": 0.01, "seed": 3},
            "di_kind": "janapati"}"#,
    );
    let res = run(&["synth", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_success(&res);
    assert!(out.join("config.json").exists(), "config copy missing");
    assert!(out.join("di.csv").exists());
    let truth = std::fs::read_to_string(out.join("truth.csv")).unwrap();
    let mut lines = truth.lines();
    assert_eq!(lines.next(), Some("state,low,high"));
    assert_eq!(lines.count(), 201);
}

#[test]
fn fit_both_models_on_synthetic_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "fit.json",
        r#"{"dataset": {"kind": "synth",
                        "synth": {"family": {"name": "forrester"}, "noise_l2": 0.01, "seed": 1},
                        "n_test_probes": 40},
            "optimizer": {"restarts": 2, "max_evals": 150},
            "n_probes": 50}"#,
    );
    for (cmd, model) in [("fit-gp", "gp"), ("fit-mfgp", "mfgp")] {
        let out = dir.path().join(cmd);
        let res = run(&[cmd, "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_success(&res);
        assert!(out.join("model.json").exists());
        let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
        let mut lines = metrics.lines();
        assert_eq!(
            lines.next(),
            Some("model,n_exp_sets,n_sim_points,rmse,r2,fit_seconds,predict_seconds")
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with(&format!("{model},4,")), "row: {row}");
        let curves = std::fs::read_to_string(out.join("curves.csv")).unwrap();
        assert_eq!(curves.lines().count(), 51, "header plus one row per probe");
    }
}

#[test]
fn extract_di_writes_per_path_tables_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let set_dir = dir.path().join("signals");
    save_signal_set(&set_dir, &demo_signal_set()).unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "extract.json",
        &format!(
            r#"{{"signal_set": "{}", "di_kind": "rmsd", "taper_fraction": 0.1}}"#,
            set_dir.display()
        ),
    );
    let res = run(&["extract-di", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_success(&res);
    for name in ["di_p1-2.csv", "di_p3-4.csv"] {
        let table = std::fs::read_to_string(out.join(name)).unwrap();
        assert_eq!(
            table.lines().next(),
            Some("state,value,fidelity,path_id,realization")
        );
        assert_eq!(table.lines().count(), 13, "header plus 12 records in {name}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let rows = summary.as_array().unwrap();
    // 2 paths x (3 L2 states + 3 L1 states).
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r["n"] == 2));
}

#[test]
fn reconstruct_emits_a_low_fidelity_set() {
    let dir = tempfile::tempdir().unwrap();
    let set_dir = dir.path().join("signals");
    save_signal_set(&set_dir, &demo_signal_set()).unwrap();
    let model_path = dir.path().join("model.json");
    CompensationModel::new(-0.4, -0.1, 2.0e-4, vec![0.3, 0.3])
        .unwrap()
        .save(&model_path)
        .unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "reconstruct.json",
        &format!(
            r#"{{"model": "{}", "signal_set": "{}",
                 "loads": [0.0, 10.0, 20.0], "strain_per_unit_load": 2.0e-5}}"#,
            model_path.display(),
            set_dir.display()
        ),
    );
    let res = run(&["reconstruct", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_success(&res);
    let rebuilt = load_signal_set(&out.join("l1_set")).unwrap();
    assert_eq!(rebuilt.records().len(), 6, "2 paths x 3 loads");
    assert!(rebuilt.records().iter().all(|r| r.fidelity == Fidelity::L1));
    assert_eq!(rebuilt.state_unit(), "load");
}

#[test]
fn missing_config_is_a_config_error() {
    let res = run(&["fit-gp", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).starts_with("error:"));
}

#[test]
fn unknown_config_field_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"synth": {"family": {"name": "forrester"}}, "di_kind": "rmsd", "extra": 1}"#,
    );
    let res = run(&["synth", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn missing_data_file_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "fit.json",
        &format!(
            r#"{{"dataset": {{"kind": "csv", "paths": ["{}"], "di_kind": "rmsd",
                              "split": {{"train_fraction": 0.75, "seed": 0}}}}}}"#,
            dir.path().join("absent.csv").display()
        ),
    );
    let out = dir.path().join("out");
    let res = run(&["fit-gp", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn default_out_dir_lands_under_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "synth.json",
        r#"{"synth": {"family": {"name": "di_like"}}, "di_kind": "rmsd"}"#,
    );
    let res = Command::new(bin())
        .args(["synth", "--config", &cfg])
        .current_dir(dir.path())
        .output()
        .expect("binary should launch");
    assert_success(&res);
    let stdout = String::from_utf8_lossy(&res.stdout);
    let line = stdout
        .lines()
        .find(|l| l.starts_with("results: "))
        .expect("results path printed");
    let reported = Path::new(line.trim_start_matches("results: "));
    let reported = if reported.is_absolute() {
        reported.to_path_buf()
    } else {
        dir.path().join(reported)
    };
    assert!(reported.starts_with(dir.path().join("results").join("synth")));
    assert!(reported.join("di.csv").exists());
}
