//! Scenario files, subcommands and artifact writers behind the `tpdyn` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod output;
pub mod svg;
pub mod sweep;
pub mod validate;

pub use config::ScenarioConfig;
pub use error::{CliError, CliResult};
pub use output::{CommandOutput, Destinations};
