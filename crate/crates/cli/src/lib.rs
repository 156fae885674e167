//! Command-line front end for the two-fidelity damage-index models.
//!
//! Every subcommand reads a JSON config, writes its outputs into a fresh
//! results directory (or `--out`), and copies the config alongside them so
//! a run can be reproduced from its output folder alone.

pub mod commands;
pub mod config;
pub mod data;
pub mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mfgpr_core::Error;

use crate::config::{
    load_config, ExtractDiConfig, FitConfig, ReconstructConfig, SynthCmdConfig, Task1Config,
    Task2Config, Task3Config,
};
use crate::output::prepare_out_dir;

#[derive(Debug, Parser)]
#[command(name = "mfgpr", about = "Two-fidelity Gaussian-process damage modeling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON configuration file for this subcommand.
    #[arg(long)]
    pub config: PathBuf,
    /// Override the dataset seed (and run only this seed where a config
    /// lists several).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write outputs here instead of a fresh results/<command>/<timestamp>/.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute damage-index tables from a waveform set.
    ExtractDi(RunArgs),
    /// Fit a single-fidelity GP to the experimental data.
    FitGp(RunArgs),
    /// Fit the two-fidelity GP to experimental plus simulation data.
    FitMfgp(RunArgs),
    /// Grow the simulation set point by point under fixed experiments.
    Task1(RunArgs),
    /// Replace experimental states with simulation points one at a time.
    Task2(RunArgs),
    /// Sequential simulation selection under different acquisition rules.
    Task3(RunArgs),
    /// Generate a synthetic two-fidelity dataset.
    Synth(RunArgs),
    /// Reconstruct load-shifted waveforms from a compensation model.
    Reconstruct(RunArgs),
}

/// Map an error to the process exit code: 2 for configuration problems,
/// 3 for data problems, 4 for numerical failures.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) => 2,
        Error::Data(_) | Error::Io { .. } => 3,
        Error::Numerical(_) => 4,
    }
}

/// Run one parsed invocation end to end and print the results path.
///
/// The config is parsed before the results directory is created, so a bad
/// config exits without leaving an empty folder behind.
pub fn run(cli: Cli) -> mfgpr_core::Result<PathBuf> {
    let out_dir = match &cli.command {
        Command::ExtractDi(a) => {
            let config: ExtractDiConfig = load_config(&a.config)?;
            let out = prepare_out_dir("extract-di", &a.config, a.out.as_deref())?;
            commands::cmd_extract_di(&config, &out)?;
            out
        }
        Command::FitGp(a) => {
            let config: FitConfig = load_config(&a.config)?;
            let out = prepare_out_dir("fit-gp", &a.config, a.out.as_deref())?;
            commands::cmd_fit_gp(&config, a.seed, &out)?;
            out
        }
        Command::FitMfgp(a) => {
            let config: FitConfig = load_config(&a.config)?;
            let out = prepare_out_dir("fit-mfgp", &a.config, a.out.as_deref())?;
            commands::cmd_fit_mfgp(&config, a.seed, &out)?;
            out
        }
        Command::Task1(a) => {
            let config: Task1Config = load_config(&a.config)?;
            let out = prepare_out_dir("task1", &a.config, a.out.as_deref())?;
            commands::cmd_task1(&config, a.seed, &out)?;
            out
        }
        Command::Task2(a) => {
            let config: Task2Config = load_config(&a.config)?;
            let out = prepare_out_dir("task2", &a.config, a.out.as_deref())?;
            commands::cmd_task2(&config, a.seed, &out)?;
            out
        }
        Command::Task3(a) => {
            let config: Task3Config = load_config(&a.config)?;
            let out = prepare_out_dir("task3", &a.config, a.out.as_deref())?;
            commands::cmd_task3(&config, a.seed, &out)?;
            out
        }
        Command::Synth(a) => {
            let config: SynthCmdConfig = load_config(&a.config)?;
            let out = prepare_out_dir("synth", &a.config, a.out.as_deref())?;
            commands::cmd_synth(&config, a.seed, &out)?;
            out
        }
        Command::Reconstruct(a) => {
            let config: ReconstructConfig = load_config(&a.config)?;
            let out = prepare_out_dir("reconstruct", &a.config, a.out.as_deref())?;
            commands::cmd_reconstruct(&config, &out)?;
            out
        }
    };
    println!("results: {}", out_dir.display());
    Ok(out_dir)
}

/// Parse, run, and translate errors into exit codes; the binary's whole body.
pub fn main_impl() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
