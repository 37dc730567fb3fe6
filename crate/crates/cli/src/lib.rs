//! Experiment harness: configuration, run artifacts, and the pipeline
//! commands (scene generation, oracle labeling, training, rollouts,
//! reporting).

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod manifest;
pub mod runner;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
