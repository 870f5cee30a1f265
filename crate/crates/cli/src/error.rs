//! CLI error channel with distinct exit codes per failure class.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad or inconsistent configuration / arguments (exit 2).
    Config(String),
    /// I/O, format or input-data failures (exit 3).
    Data(String),
    /// Numerical non-convergence (exit 4).
    NonConvergence(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::NonConvergence(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Data(msg) => write!(f, "data error: {msg}"),
            CliError::NonConvergence(msg) => write!(f, "numerical error: {msg}"),
        }
    }
}

impl From<qbayes::Error> for CliError {
    fn from(e: qbayes::Error) -> Self {
        match e {
            qbayes::Error::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
