//! Experiment harness: a small configuration language, a runner that turns a
//! configuration into CSV/SVG outputs, and the randomized property table for
//! the conformable derivative.

pub mod config;
pub mod experiment;
pub mod properties;

pub use config::{parse_config, serialize_config, ConfigError, ExperimentConfig};
pub use experiment::{manifest, run_experiment, write_outputs, RunError, RunOptions, RunOutcome};
