//! Command-line harness: configuration, parallel sweeps, CSV output and presets.

pub mod config;
pub mod manifest;
pub mod output;
pub mod pool;
pub mod presets;
pub mod run;
pub mod studies;

pub use config::{ConfigError, Experiment, ExperimentConfig, RawConfig};
pub use run::{run, RunError, RunSummary};
