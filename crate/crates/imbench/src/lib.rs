//! Benchmark harness: experiment configuration, grid runner and result files.

pub mod config;
pub mod datasets;
pub mod emit;
pub mod runner;

pub use config::{ConfigError, DatasetRef, ExperimentConfig, RawConfig};
pub use emit::emit_results;
pub use runner::{run_experiment, ExperimentReport, ExperimentResult};
