//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input that must be finite was NaN or infinite.
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    /// A parameter violated its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix failed the special-unitarity check.
    #[error("matrix is not special-unitary: unitarity defect {defect:.3e} exceeds {tol:.3e}")]
    NotUnitary { defect: f64, tol: f64 },

    /// A protocol builder was called outside its regime.
    #[error("wrong regime: {message}")]
    WrongRegime { message: String },

    /// The Euler-angle chart hit its coordinate singularity.
    #[error(
        "coordinate singularity: |cos tau1| fell below {limit:.1e} near t = {t:.6e}; \
         the tau1 = pi/2 chart boundary cannot be integrated through"
    )]
    EulerSingularity { t: f64, limit: f64 },

    /// Adaptive step-size control shrank the step below representable size.
    #[error("integration failure: step size underflow at t = {t:.6e} (dt = {dt:.3e})")]
    StepUnderflow { t: f64, dt: f64 },

    /// Failed to parse a state literal or other textual input.
    #[error("parse error: {0}")]
    Parse(String),

    /// An internal consistency check failed; this indicates a bug.
    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
