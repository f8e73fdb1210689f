use thiserror::Error;

/// Errors raised anywhere in the estimation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Observed data that cannot be used (non-finite cells, ragged rows).
    #[error("input error at row {row}, column {col}: {reason}")]
    Input {
        row: usize,
        col: usize,
        reason: String,
    },

    #[error("dimension error: {0}")]
    Dimension(String),

    /// A caller-supplied argument outside its documented domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    /// An internal invariant of the sampler was broken. Never recovered from.
    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("optimization did not converge after {iterations} sweeps (projected gradient {gradient:.3e})")]
    NoConvergence { iterations: usize, gradient: f64 },

    #[error("constrained MLE infeasible: {0}")]
    Infeasible(String),

    #[error("chain aborted at sweep {sweep}: {source}")]
    Chain {
        sweep: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// Strips any `Chain` wrappers and returns the underlying cause.
    pub fn root(&self) -> &Error {
        match self {
            Error::Chain { source, .. } => source.root(),
            other => other,
        }
    }
}
