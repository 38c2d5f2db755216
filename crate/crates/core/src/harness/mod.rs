//! Instance files, screening, and the penalty-versus-constrained campaign.

pub mod classical;
pub mod experiment;
pub mod instance;
pub mod verify;

pub use classical::{classical_spectrum, ClassicalSpectrum};
pub use experiment::{
    derive_seed, fit_slope, generate_screened_ensemble, is_unique_ground, median, records_to_csv,
    run_instance, scaling_experiment, screen_instances, summary_path, write_outcome, ScalingConfig,
    ScalingOutcome, ScalingRecord, ScalingSummary, Screening, SizeSummary,
};
pub use instance::{random_cnf, Cnf, Encoding, InstanceDescriptor, Params, Payload, Problem, RelevantBasis};
pub use verify::{verify_suite, Check, VerifyReport};
