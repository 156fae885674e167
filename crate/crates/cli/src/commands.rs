//! Implementations of the eight subcommands.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use mfgpr_core::active_learning::{
    run_active_loop, run_random_loop, AcquisitionSpec, CandidatePool, LoopConfig, LoopResult,
};
use mfgpr_core::damage_index::{build_di_dataset, write_di_csv, DiDataset};
use mfgpr_core::gp::{default_gp_bounds, gp_fit, gp_predict, GpTrainingData, Prediction, TrainedGp};
use mfgpr_core::load_compensation::{reconstruct, CompensationModel, StrainState};
use mfgpr_core::mfgp::{
    default_mf_bounds, mf_fit, mf_predict, variance_floor, MfHyperparameters, MfTrainingData,
    TrainedMfGp,
};
use mfgpr_core::optimizer::OptimizerConfig;
use mfgpr_core::signal::{
    apply_cosine_taper, extract_first_packet, load_signal_set, save_signal_set, Fidelity,
    SignalRecord, SignalSet,
};
use mfgpr_core::synth::{generate, linspace, to_di_dataset};
use mfgpr_core::{r_squared, rmse, Error, Result};

use crate::config::{
    AcquisitionName, ExtractDiConfig, FitConfig, ReconstructConfig, SynthCmdConfig, Task1Config,
    Task2Config, Task3Config,
};
use crate::data::{prepare, PreparedData};
use crate::output::{
    write_curves_csv, write_history_csv, write_json, write_metrics_csv, CurveRow, MetricsRow,
};

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

fn distinct_states(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Number of distinct high-fidelity states in a training block; reported
/// as the experimental-data budget column of the metrics table.
fn n_exp_sets(x_l2: &[f64]) -> usize {
    distinct_states(x_l2).len()
}

fn probe_grid(train: &MfTrainingData, n_probes: usize) -> Result<Vec<f64>> {
    if n_probes < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 probe points, got {n_probes}"
        )));
    }
    let xs = train.all_xs();
    let lo = xs.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let hi = xs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if !(lo < hi) {
        return Err(Error::data(
            "training states span a single point; no probe grid",
        ));
    }
    Ok(linspace(lo, hi, n_probes))
}

fn require_test_set(prepared: &PreparedData) -> Result<()> {
    if prepared.test_states.len() < 2 {
        return Err(Error::data(format!(
            "evaluation needs at least 2 held-out points, got {}",
            prepared.test_states.len()
        )));
    }
    Ok(())
}

struct Evaluation {
    rmse: f64,
    r2: f64,
    predict_seconds: f64,
    curve: Vec<CurveRow>,
}

fn evaluate(
    predict: impl Fn(&[f64]) -> Vec<Prediction>,
    model_name: &str,
    step: usize,
    test_states: &[f64],
    test_values: &[f64],
    probes: &[f64],
) -> Result<Evaluation> {
    let t = Instant::now();
    let test_pred = predict(test_states);
    let probe_pred = predict(probes);
    let predict_seconds = t.elapsed().as_secs_f64();
    let means: Vec<f64> = test_pred.iter().map(|p| p.mean).collect();
    let curve = probes
        .iter()
        .zip(&probe_pred)
        .map(|(&state, p)| {
            let half = 1.96 * p.variance.sqrt();
            CurveRow {
                model: model_name.to_string(),
                step,
                state,
                mean: p.mean,
                lower: p.mean - half,
                upper: p.mean + half,
            }
        })
        .collect();
    Ok(Evaluation {
        rmse: rmse(&means, test_values)?,
        r2: r_squared(&means, test_values)?,
        predict_seconds,
        curve,
    })
}

fn fit_gp_on_l2(
    train: &MfTrainingData,
    noise_floor: f64,
    optimizer: &OptimizerConfig,
) -> Result<(TrainedGp, f64)> {
    let data = GpTrainingData::new(train.x_l2().to_vec(), train.y_l2().to_vec())?;
    let bounds = default_gp_bounds(&data, noise_floor)?;
    let t = Instant::now();
    let model = gp_fit(&data, &bounds, optimizer)?;
    Ok((model, t.elapsed().as_secs_f64()))
}

fn fit_mf(
    train: &MfTrainingData,
    noise_floor: f64,
    optimizer: &OptimizerConfig,
) -> Result<(TrainedMfGp, f64)> {
    let bounds = default_mf_bounds(train, noise_floor)?;
    let t = Instant::now();
    let model = mf_fit(train, &bounds, noise_floor, optimizer)?;
    Ok((model, t.elapsed().as_secs_f64()))
}

/// Extract damage indices from a signal set: one CSV per path plus a
/// per-state summary.
pub fn cmd_extract_di(config: &ExtractDiConfig, out_dir: &Path) -> Result<()> {
    let set = load_signal_set(&config.signal_set)?;
    let set = preprocess_signal_set(&set, config)?;
    let table = build_di_dataset(&set, config.di_kind)?;

    for path_id in set.path_ids() {
        let subset = DiDataset {
            points: table
                .points
                .iter()
                .filter(|p| p.path_id == path_id)
                .cloned()
                .collect(),
            di_kind: table.di_kind,
        };
        let file = out_dir.join(format!("di_{}.csv", sanitize(&path_id)));
        write_di_csv(&file, &subset)?;
    }

    write_json(&out_dir.join("summary.json"), &summarize(&table))?;
    Ok(())
}

fn preprocess_signal_set(set: &SignalSet, config: &ExtractDiConfig) -> Result<SignalSet> {
    if config.window.is_none() && config.taper_fraction.is_none() {
        return Ok(set.clone());
    }
    let mut records = Vec::with_capacity(set.records().len());
    for r in set.records() {
        let mut signal = r.signal.clone();
        if let Some(w) = &config.window {
            signal = extract_first_packet(&signal, w.start, w.length)?;
        }
        if let Some(fraction) = config.taper_fraction {
            signal = apply_cosine_taper(&signal, fraction)?;
        }
        records.push(SignalRecord {
            signal,
            path_id: r.path_id.clone(),
            state: r.state,
            realization: r.realization,
            fidelity: r.fidelity,
        });
    }
    SignalSet::new(
        records,
        set.sample_rate_hz(),
        Some(set.baseline_state()),
        set.state_unit(),
    )
}

#[derive(serde::Serialize)]
struct SummaryRow {
    path_id: String,
    fidelity: String,
    state: f64,
    mean: f64,
    variance: f64,
    n: usize,
}

fn summarize(table: &DiDataset) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, String, u64), Vec<f64>> = BTreeMap::new();
    for p in &table.points {
        groups
            .entry((p.path_id.clone(), p.fidelity.to_string(), p.state.to_bits()))
            .or_default()
            .push(p.value);
    }
    groups
        .into_iter()
        .map(|((path_id, fidelity, bits), values)| {
            let n = values.len();
            let mean = values.iter().sum::<f64>() / n as f64;
            let variance = if n > 1 {
                values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
            } else {
                0.0
            };
            SummaryRow {
                path_id,
                fidelity,
                state: f64::from_bits(bits),
                mean,
                variance,
                n,
            }
        })
        .collect()
}

/// Fit a standard GP to the high-fidelity training data.
pub fn cmd_fit_gp(config: &FitConfig, seed: Option<u64>, out_dir: &Path) -> Result<()> {
    let prepared = prepare(&config.dataset, seed)?;
    require_test_set(&prepared)?;
    let floor = prepared.noise_floor();
    let (model, fit_seconds) = fit_gp_on_l2(&prepared.train, floor, &config.optimizer)?;
    let probes = probe_grid(&prepared.train, config.n_probes)?;
    let eval = evaluate(
        |xs| gp_predict(&model, xs),
        "gp",
        0,
        &prepared.test_states,
        &prepared.test_values,
        &probes,
    )?;
    std::fs::write(out_dir.join("model.json"), model.to_json())
        .map_err(|e| Error::io(out_dir.join("model.json"), e))?;
    write_metrics_csv(
        &out_dir.join("metrics.csv"),
        &[MetricsRow {
            model: "gp".into(),
            n_exp_sets: n_exp_sets(prepared.train.x_l2()),
            n_sim_points: 0,
            rmse: eval.rmse,
            r2: eval.r2,
            fit_seconds,
            predict_seconds: eval.predict_seconds,
        }],
    )?;
    write_curves_csv(&out_dir.join("curves.csv"), &eval.curve)?;
    Ok(())
}

/// Fit the two-fidelity GP to the full training data.
pub fn cmd_fit_mfgp(config: &FitConfig, seed: Option<u64>, out_dir: &Path) -> Result<()> {
    let prepared = prepare(&config.dataset, seed)?;
    require_test_set(&prepared)?;
    let floor = prepared.noise_floor();
    let (model, fit_seconds) = fit_mf(&prepared.train, floor, &config.optimizer)?;
    let probes = probe_grid(&prepared.train, config.n_probes)?;
    let eval = evaluate(
        |xs| mf_predict(&model, xs),
        "mfgp",
        0,
        &prepared.test_states,
        &prepared.test_values,
        &probes,
    )?;
    std::fs::write(out_dir.join("model.json"), model.to_json())
        .map_err(|e| Error::io(out_dir.join("model.json"), e))?;
    write_metrics_csv(
        &out_dir.join("metrics.csv"),
        &[MetricsRow {
            model: "mfgp".into(),
            n_exp_sets: n_exp_sets(prepared.train.x_l2()),
            n_sim_points: prepared.train.n1(),
            rmse: eval.rmse,
            r2: eval.r2,
            fit_seconds,
            predict_seconds: eval.predict_seconds,
        }],
    )?;
    write_curves_csv(&out_dir.join("curves.csv"), &eval.curve)?;
    Ok(())
}

/// Coverage order for adding low-fidelity points: repeatedly pick the
/// candidate farthest (by nearest-anchor distance) from the high-fidelity
/// states and everything already picked. Ties go to the smaller state.
pub fn farthest_point_order(l1_states: &[f64], l2_states: &[f64]) -> Vec<usize> {
    let mut anchors = distinct_states(l2_states);
    let n = l1_states.len();
    let mut used = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            if used[i] {
                continue;
            }
            let d = anchors
                .iter()
                .map(|a| (l1_states[i] - a).abs())
                .fold(f64::INFINITY, f64::min);
            let better = match best {
                None => true,
                Some((bi, bd)) => d > bd || (d == bd && l1_states[i] < l1_states[bi]),
            };
            if better {
                best = Some((i, d));
            }
        }
        let (bi, _) = best.expect("unused candidate exists");
        used[bi] = true;
        anchors.push(l1_states[bi]);
        order.push(bi);
    }
    order
}

/// Task 1: hold the high-fidelity data fixed and add low-fidelity points
/// one at a time in coverage order, tracking both models' accuracy.
pub fn cmd_task1(config: &Task1Config, seed: Option<u64>, out_dir: &Path) -> Result<()> {
    let prepared = prepare(&config.dataset, seed)?;
    require_test_set(&prepared)?;
    let n_l1 = prepared.train.n1();
    let k_max = config.max_added_l1.unwrap_or(n_l1);
    if k_max > n_l1 {
        return Err(Error::invalid(format!(
            "{k_max} additions requested but the dataset provides only {n_l1} simulation points"
        )));
    }
    let floor = prepared.noise_floor();
    let probes = probe_grid(&prepared.train, config.n_probes)?;
    let order = farthest_point_order(prepared.train.x_l1(), prepared.train.x_l2());

    let mut rows = Vec::new();
    let mut curves = Vec::new();

    let (gp_model, gp_fit_seconds) = fit_gp_on_l2(&prepared.train, floor, &config.optimizer)?;
    let gp_eval = evaluate(
        |xs| gp_predict(&gp_model, xs),
        "gp",
        0,
        &prepared.test_states,
        &prepared.test_values,
        &probes,
    )?;
    rows.push(MetricsRow {
        model: "gp".into(),
        n_exp_sets: n_exp_sets(prepared.train.x_l2()),
        n_sim_points: 0,
        rmse: gp_eval.rmse,
        r2: gp_eval.r2,
        fit_seconds: gp_fit_seconds,
        predict_seconds: gp_eval.predict_seconds,
    });
    curves.extend(gp_eval.curve);

    for k in 0..=k_max {
        let x_l1: Vec<f64> = order[..k].iter().map(|&i| prepared.train.x_l1()[i]).collect();
        let y_l1: Vec<f64> = order[..k].iter().map(|&i| prepared.train.y_l1()[i]).collect();
        let train_k = MfTrainingData::new(
            x_l1,
            y_l1,
            prepared.train.x_l2().to_vec(),
            prepared.train.y_l2().to_vec(),
        )?;
        let (model, fit_seconds) = fit_mf(&train_k, floor, &config.optimizer)?;
        let eval = evaluate(
            |xs| mf_predict(&model, xs),
            "mfgp",
            k,
            &prepared.test_states,
            &prepared.test_values,
            &probes,
        )?;
        rows.push(MetricsRow {
            model: "mfgp".into(),
            n_exp_sets: n_exp_sets(train_k.x_l2()),
            n_sim_points: k,
            rmse: eval.rmse,
            r2: eval.r2,
            fit_seconds,
            predict_seconds: eval.predict_seconds,
        });
        curves.extend(eval.curve);
    }

    write_metrics_csv(&out_dir.join("metrics.csv"), &rows)?;
    write_curves_csv(&out_dir.join("curves.csv"), &curves)?;
    Ok(())
}

/// Replacement order for task 2: non-pinned states sorted by distance
/// from the state-range center, farthest first; ties to the smaller state.
pub fn outside_in_order(l2_states: &[f64], pinned: &[f64]) -> Vec<f64> {
    let states = distinct_states(l2_states);
    let lo = states.first().copied().unwrap_or(0.0);
    let hi = states.last().copied().unwrap_or(0.0);
    let center = 0.5 * (lo + hi);
    let mut order: Vec<f64> = states
        .into_iter()
        .filter(|s| !pinned.contains(s))
        .collect();
    order.sort_by(|a, b| {
        let (da, db) = ((a - center).abs(), (b - center).abs());
        db.partial_cmp(&da)
            .unwrap()
            .then_with(|| a.partial_cmp(b).unwrap())
    });
    order
}

/// Task 2: remove experimental state-sets one state at a time
/// (outside-in), keeping the full simulation set underneath the
/// two-fidelity model, so total state coverage stays constant while the
/// experimental budget shrinks.
pub fn cmd_task2(config: &Task2Config, seed: Option<u64>, out_dir: &Path) -> Result<()> {
    let prepared = prepare(&config.dataset, seed)?;
    require_test_set(&prepared)?;
    let states = distinct_states(prepared.train.x_l2());
    if states.len() < 2 {
        return Err(Error::data(
            "task 2 needs at least 2 distinct high-fidelity states",
        ));
    }
    let pinned = config.pinned_states.clone().unwrap_or_else(|| {
        vec![*states.first().unwrap(), *states.last().unwrap()]
    });
    if pinned.is_empty() {
        return Err(Error::invalid("at least one state must stay experimental"));
    }
    for p in &pinned {
        if !states.contains(p) {
            return Err(Error::invalid(format!(
                "pinned state {p} is not a high-fidelity training state"
            )));
        }
    }
    let order = outside_in_order(prepared.train.x_l2(), &pinned);
    let probes = probe_grid(&prepared.train, config.n_probes)?;

    let mut rows = Vec::new();
    let mut curves = Vec::new();

    for r in 0..=order.len() {
        let replaced = &order[..r];
        let (x_l2, y_l2): (Vec<f64>, Vec<f64>) = prepared
            .train
            .x_l2()
            .iter()
            .copied()
            .zip(prepared.train.y_l2().iter().copied())
            .filter(|(x, _)| !replaced.contains(x))
            .unzip();
        let pairs: Vec<(f64, f64)> = x_l2.iter().copied().zip(y_l2.iter().copied()).collect();
        let floor = variance_floor(&pairs);

        let train_r = MfTrainingData::new(
            prepared.train.x_l1().to_vec(),
            prepared.train.y_l1().to_vec(),
            x_l2,
            y_l2,
        )?;

        let (gp_model, gp_seconds) = fit_gp_on_l2(&train_r, floor, &config.optimizer)?;
        let gp_eval = evaluate(
            |xs| gp_predict(&gp_model, xs),
            "gp",
            r,
            &prepared.test_states,
            &prepared.test_values,
            &probes,
        )?;
        rows.push(MetricsRow {
            model: "gp".into(),
            n_exp_sets: n_exp_sets(train_r.x_l2()),
            n_sim_points: 0,
            rmse: gp_eval.rmse,
            r2: gp_eval.r2,
            fit_seconds: gp_seconds,
            predict_seconds: gp_eval.predict_seconds,
        });
        curves.extend(gp_eval.curve);

        let (mf_model, mf_seconds) = fit_mf(&train_r, floor, &config.optimizer)?;
        let mf_eval = evaluate(
            |xs| mf_predict(&mf_model, xs),
            "mfgp",
            r,
            &prepared.test_states,
            &prepared.test_values,
            &probes,
        )?;
        rows.push(MetricsRow {
            model: "mfgp".into(),
            n_exp_sets: n_exp_sets(train_r.x_l2()),
            n_sim_points: train_r.n1(),
            rmse: mf_eval.rmse,
            r2: mf_eval.r2,
            fit_seconds: mf_seconds,
            predict_seconds: mf_eval.predict_seconds,
        });
        curves.extend(mf_eval.curve);
    }

    write_metrics_csv(&out_dir.join("metrics.csv"), &rows)?;
    write_curves_csv(&out_dir.join("curves.csv"), &curves)?;
    Ok(())
}

#[derive(Debug, Clone)]
struct SummaryEntry {
    acquisition: String,
    seed: u64,
    best_rmse: f64,
    r2_at_best: f64,
    fit_seconds: f64,
    predict_seconds: f64,
}

fn write_summary_csv(path: &Path, rows: &[SummaryEntry]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    w.write_record([
        "acquisition",
        "seed",
        "best_rmse",
        "r2_at_best",
        "fit_seconds",
        "predict_seconds",
    ])
    .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    for r in rows {
        w.write_record([
            r.acquisition.clone(),
            r.seed.to_string(),
            r.best_rmse.to_string(),
            r.r2_at_best.to_string(),
            r.fit_seconds.to_string(),
            r.predict_seconds.to_string(),
        ])
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Task 3: sequential design with each requested acquisition rule (plus
/// optionally a random baseline), repeated over seeds that re-draw the
/// dataset.
pub fn cmd_task3(config: &Task3Config, seed: Option<u64>, out_dir: &Path) -> Result<()> {
    if config.acquisitions.is_empty() {
        return Err(Error::invalid("no acquisition rules requested"));
    }
    if config.n_iterations == 0 {
        return Err(Error::invalid("task 3 needs at least one iteration"));
    }
    if config.acquisitions.contains(&AcquisitionName::L2Loss) && !config.dataset.is_synthetic() {
        return Err(Error::invalid(
            "the l2_loss rule needs a known reference curve; it is available for synthetic datasets only",
        ));
    }
    let seeds: Vec<u64> = match seed {
        Some(s) => vec![s],
        None => config.seeds.clone(),
    };
    if seeds.is_empty() {
        return Err(Error::invalid("no seeds requested"));
    }

    let mut summary = Vec::new();
    for acq in &config.acquisitions {
        for &run_seed in &seeds {
            let prepared = prepare(&config.dataset, Some(run_seed))?;
            require_test_set(&prepared)?;
            if prepared.train.n1() == 0 {
                return Err(Error::data(
                    "dataset provides no simulation candidates for the pool",
                ));
            }
            let pool = CandidatePool::new(
                prepared.train.x_l1().to_vec(),
                prepared.train.y_l1().to_vec(),
            )?;
            let initial = MfTrainingData::new(
                vec![],
                vec![],
                prepared.train.x_l2().to_vec(),
                prepared.train.y_l2().to_vec(),
            )?;
            let loop_config = LoopConfig {
                n_iterations: config.n_iterations,
                test_states: prepared.test_states.clone(),
                test_values: prepared.test_values.clone(),
                noise_floor: prepared.noise_floor(),
                fit: config.optimizer.clone(),
            };

            let t = Instant::now();
            let result: LoopResult = match acq {
                AcquisitionName::Random => {
                    run_random_loop(&loop_config, &initial, pool, run_seed)?
                }
                AcquisitionName::L2Loss => {
                    let truth = prepared
                        .truth
                        .expect("synthetic dataset checked above");
                    run_active_loop(
                        &loop_config,
                        &initial,
                        pool,
                        &AcquisitionSpec::L2Loss {
                            base: Arc::new(move |x| truth.high(x)),
                        },
                    )?
                }
                AcquisitionName::MaxVariance => {
                    run_active_loop(&loop_config, &initial, pool, &AcquisitionSpec::MaxVariance)?
                }
                AcquisitionName::Ucb => run_active_loop(
                    &loop_config,
                    &initial,
                    pool,
                    &AcquisitionSpec::Ucb {
                        lambda: config.ucb_lambda,
                    },
                )?,
                AcquisitionName::Ei => run_active_loop(
                    &loop_config,
                    &initial,
                    pool,
                    &AcquisitionSpec::Ei { xi: config.ei_xi },
                )?,
            };
            let fit_seconds = t.elapsed().as_secs_f64();

            let probes = probe_grid(result.final_model.data(), 201)?;
            let t = Instant::now();
            let _ = mf_predict(&result.final_model, &probes);
            let predict_seconds = t.elapsed().as_secs_f64();

            let tag = format!("{acq}_seed{run_seed}");
            write_history_csv(&out_dir.join(format!("history_{tag}.csv")), &result.history)?;
            let params: Vec<MfHyperparameters> =
                result.history.iter().map(|r| r.params.clone()).collect();
            write_json(&out_dir.join(format!("hyperparams_{tag}.json")), &params)?;

            let best = result
                .history
                .iter()
                .min_by(|a, b| a.rmse.total_cmp(&b.rmse))
                .expect("n_iterations >= 1");
            summary.push(SummaryEntry {
                acquisition: acq.to_string(),
                seed: run_seed,
                best_rmse: best.rmse,
                r2_at_best: best.r_squared,
                fit_seconds,
                predict_seconds,
            });
        }
    }
    write_summary_csv(&out_dir.join("summary.csv"), &summary)?;
    Ok(())
}

/// Generate a synthetic two-fidelity dataset as a damage-index table plus
/// its ground-truth curves.
pub fn cmd_synth(config: &SynthCmdConfig, seed: Option<u64>, out_dir: &Path) -> Result<()> {
    let mut synth = config.synth.clone();
    if let Some(s) = seed {
        synth.seed = s;
    }
    let ds = generate(&synth)?;
    let table = to_di_dataset(&ds, config.di_kind);
    write_di_csv(&out_dir.join("di.csv"), &table)?;

    let (lo, hi) = ds.truth.domain();
    let grid = linspace(lo, hi, 201);
    let path = out_dir.join("truth.csv");
    let mut w = csv::Writer::from_path(&path)
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    w.write_record(["state", "low", "high"])
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    for &x in &grid {
        w.write_record([
            x.to_string(),
            ds.truth.low(x).to_string(),
            ds.truth.high(x).to_string(),
        ])
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(())
}

/// Reconstruct low-fidelity waveforms for a set of load levels from each
/// path's unloaded baseline packet.
pub fn cmd_reconstruct(config: &ReconstructConfig, out_dir: &Path) -> Result<()> {
    if config.loads.is_empty() {
        return Err(Error::invalid("no load levels requested"));
    }
    if !config.loads.iter().all(|l| l.is_finite()) {
        return Err(Error::invalid("load levels must be finite"));
    }
    if !config.strain_per_unit_load.is_finite() {
        return Err(Error::invalid("strain_per_unit_load must be finite"));
    }
    let model = CompensationModel::load(&config.model)?;
    let set = load_signal_set(&config.signal_set)?;
    let baseline_state = set.baseline_state();

    let mut records = Vec::new();
    for path_id in set.path_ids() {
        let baseline = set
            .records()
            .iter()
            .find(|r| {
                r.path_id == path_id
                    && r.fidelity == Fidelity::L2
                    && r.state == baseline_state
                    && r.realization == 0
            })
            .ok_or_else(|| {
                Error::data(format!(
                    "path {path_id} has no baseline record (state {baseline_state}, realization 0)"
                ))
            })?;
        for &load in &config.loads {
            let eps = load * config.strain_per_unit_load;
            let strain = StrainState::new(eps, eps, vec![eps; model.segment_lengths.len()])?;
            let signal = reconstruct(&model, &baseline.signal, &strain)?;
            records.push(SignalRecord {
                signal,
                path_id: path_id.clone(),
                state: load,
                realization: 0,
                fidelity: Fidelity::L1,
            });
        }
    }
    let out_set = SignalSet::new(records, set.sample_rate_hz(), None, config.state_unit.clone())?;
    save_signal_set(&out_dir.join("l1_set"), &out_set)?;
    Ok(())
}
