//! Experiment runner over `powerwalk-core`: configuration, sweeps, record
//! output (CSV and JSON) and scaling reports.

pub mod chains;
pub mod cli;
pub mod commands;
pub mod config;
pub mod records;
pub mod report;

pub use commands::{run, Check, Outcome};
pub use config::ExperimentConfig;
pub use report::ScalingReport;
