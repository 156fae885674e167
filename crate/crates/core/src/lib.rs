//! Multi-fidelity Gaussian process regression for guided-wave damage
//! indices: signal processing, damage-index extraction, load compensation,
//! two-fidelity GP modeling, and active selection of simulation points.

pub mod active_learning;
mod chol;
pub mod damage_index;
pub mod error;
pub mod evaluation;
pub mod gp;
pub mod kernel;
pub mod load_compensation;
pub mod mfgp;
pub mod optimizer;
pub mod signal;
pub mod synth;

pub use active_learning::{
    acq_ei, acq_l2, acq_max_variance, acq_ucb, expected_improvement, run_active_loop,
    run_random_loop, select_next, AcquisitionSpec, CandidatePool, IterationRecord, LoopConfig,
    LoopResult,
};
pub use damage_index::{
    build_di_dataset, compute_di, di_janapati, di_rmsd, read_di_csv, write_di_csv, DiDataset,
    DiKind, DiValue,
};
pub use error::{Error, Result};
pub use evaluation::{r_squared, rmse, split_realizations, SplitSpec};
pub use gp::{gp_fit, gp_nlml, gp_predict, GpTrainingData, Prediction, TrainedGp};
pub use kernel::{gram, se_kernel, SeKernelParams};
pub use load_compensation::{
    amplitude_ratio, calibrate, delta_toa, fractional_shift, reconstruct, CalibrationObservation,
    CalibrationResult, CompensationModel, StrainState,
};
pub use mfgp::{
    assemble_joint_covariance, default_mf_bounds, mf_fit, mf_nlml, mf_predict, variance_floor,
    MfHyperparameters, MfTrainingData, TrainedMfGp,
};
pub use optimizer::{minimize, MinimizeResult, OptimizerConfig, ParameterBox, Transform};
pub use signal::{
    apply_cosine_taper, extract_first_packet, load_signal_set, normalize_energy, read_waveform_csv,
    save_signal_set, tone_burst, write_waveform_csv, Fidelity, Signal, SignalRecord, SignalSet,
};
pub use synth::{
    forrester_high, forrester_low, generate, linspace, to_di_dataset, SynthConfig, SynthDataset,
    SynthFamily, TruthCurve,
};
