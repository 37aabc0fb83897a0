//! Configuration parsing and subcommand execution for the `psi-sim` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, RunConfig};
pub use run::{execute, write_outputs, Command, Job, Output, RunError};
