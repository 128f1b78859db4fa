//! Scenario files, result formats and the `sairs` command-line tool on top
//! of [`sairs_core`].

// Negated comparisons deliberately treat NaN as invalid input.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod fixtures;
pub mod output;

pub use commands::CliError;
pub use config::{parse_config, to_toml_string, ConfigError, ScenarioConfig};
