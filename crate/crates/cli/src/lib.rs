//! Config parsing and dispatch for the `voigt` command-line tool.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, RunConfig};
pub use run::{run, RunError};
