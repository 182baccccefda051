//! Experiment runner for the Kaczmarz solvers: parameter sweeps with
//! repeated trials, budgeted image restoration, and bound diagnostics.
//!
//! Every entry point takes an [`ExperimentSpec`] and writes its reports
//! (CSV and JSON) under the spec's output directory.

pub mod deblur;
pub mod diagnose;
pub mod experiment;
pub mod problem;
pub mod report;
pub mod spec;

pub use deblur::{deblur_run, DeblurReport};
pub use diagnose::{diagnose, DiagnoseReport};
pub use experiment::{run, run_experiment, Experiment};
pub use report::{RunRecord, Summary};
pub use spec::{ExperimentSpec, ProblemSpec};
