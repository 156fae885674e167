//! Shared fixtures for the criterion benchmarks: deterministic synthetic
//! datasets and a reduced optimizer budget so a full `cargo bench` run
//! stays in the seconds-per-benchmark range.

use mfgpr_core::{generate, OptimizerConfig, SynthConfig, SynthDataset, SynthFamily};

/// Forrester two-fidelity dataset on the unit interval, fixed seed.
pub fn forrester(n_l1: usize, n_l2: usize) -> SynthDataset {
    generate(&SynthConfig {
        family: SynthFamily::Forrester,
        noise_l2: 0.01,
        n_l1,
        n_l2,
        seed: 7,
        domain: (0.0, 1.0),
    })
    .expect("fixture generation")
}

/// Optimizer budget for fit benchmarks. Smaller than the default so the
/// measured quantity is fit cost per unit budget, not wall-clock patience.
pub fn bench_optimizer() -> OptimizerConfig {
    OptimizerConfig {
        restarts: 3,
        max_evals: 200,
        ..OptimizerConfig::default()
    }
}
