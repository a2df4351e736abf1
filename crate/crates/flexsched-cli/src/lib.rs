//! Experiment orchestration for the flexsched toolkit: configuration,
//! instance loading, and the CSV-producing subcommands.

pub mod commands;
pub mod config;
pub mod csvfmt;

use thiserror::Error;

/// Command-line failures, split by exit code: usage errors exit 1, data
/// errors (I/O, parsing, infeasibility) exit 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}
