//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on caller-supplied data was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two objects built on different parameter grids were combined.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The prior fixed-point iteration did not reach the target residual.
    #[error("prior extraction did not converge: |(I-M)p|_1 = {residual:.3e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    /// A composed posterior carried no probability mass anywhere on the grid.
    #[error("posterior is identically zero on the grid")]
    DegeneratePosterior,

    /// A measurement outcome had no calibration data at any grid point.
    #[error("outcome {value} was never observed in the calibration data")]
    UnobservedOutcome { value: f64 },

    /// The Fisher information vanished, so no Cramer-Rao bound exists.
    #[error("Fisher information is zero at theta = {theta}")]
    ZeroFisherInformation { theta: f64 },

    /// A persisted file could not be parsed.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
