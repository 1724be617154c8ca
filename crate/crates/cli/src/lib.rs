//! Experiment runner for the Free AdaGrad library: configuration, CSV traces,
//! log-log SVG plots and the bound-certification report.

pub mod config;
pub mod csv;
mod error;
pub mod experiment;
pub mod svg;

pub use config::{parse_config, Algorithm, Cli, ExperimentConfig, ProblemKind};
pub use error::CliError;
pub use experiment::{run_experiment, Check, Outcome};
