//! Experiment orchestration, statistics and reports for the remote state
//! preparation workspace, plus the pieces behind the `brsp` binary.

pub mod error;
pub mod experiments;
pub mod pool;
pub mod report;
pub mod stats;

pub use error::HarnessError;
pub use experiments::{run_experiment, ExperimentSpec, EXPERIMENTS};
pub use report::{ReportRecord, TrialRecord};
pub use stats::chi_square_uniform;
