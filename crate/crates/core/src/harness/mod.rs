//! Experiment execution, learning-curve metrics and result files.

pub mod analysis;
pub mod config;
pub mod experiment;
pub mod metrics;
pub mod output;

pub use analysis::{consistency_smoke, sweep, verify_theorem1, ConsistencyReport, SweepResults, MonotonicityReport};
pub use config::{ExperimentConfig, PRESETS};
pub use experiment::{
    drive_learners, run_experiment, run_experiment_with, run_once, ExperimentResults, LearnerTrace, PreparedSource,
    RunContext, RunResult, Summary,
};
pub use metrics::{aulc, nonmonotone_fraction, CurveStats};
pub use output::write_results;
