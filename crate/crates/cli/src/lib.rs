//! Command-line front end for `turing-rd`: configuration parsing and the
//! `analyze`, `simulate`, `sweep` and `pattern` commands.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{cmd_analyze, cmd_simulate, cmd_sweep, export_pattern, output_dir};
pub use config::{parse_config, serialize_config, ConfigError, ExperimentConfig};
pub use error::CliError;
