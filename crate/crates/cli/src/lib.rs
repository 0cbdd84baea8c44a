//! Experiment harness for rank-statistic f-divergences: flat configuration,
//! seeded runners and CSV output with a JSON header line.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{ExperimentConfig, ExperimentKind, Family};
