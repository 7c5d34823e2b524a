//! Config-driven experiment runner: parses a `key = value` file, sweeps
//! disorder realizations in parallel and writes CSV tables plus a
//! `summary.json` describing every choice that affects the numbers.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use config::{Experiment, ExperimentConfig, ModelChoice};
pub use error::CliError;
pub use output::{Artifacts, Table};
pub use runner::{execute, run};
