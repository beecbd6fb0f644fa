//! Command implementations behind the `stokl` binary: configuration-driven
//! trajectory runs, certification, KL checks and run-directory reports.

pub mod commands;
pub mod config;
pub mod output;

use std::fmt;

/// CLI failures map onto exit codes: configuration and I/O problems exit 2,
/// fail verdicts from `certify` exit 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError::Io(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        2
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config: {m}"),
            CliError::Io(m) => write!(f, "io: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<stokl_core::Error> for CliError {
    fn from(e: stokl_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
