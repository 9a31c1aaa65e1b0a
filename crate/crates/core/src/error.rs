use std::fmt;

/// Time-stepping phase in which a failure was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Initialization,
    Predictor,
    Corrector,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Initialization => write!(f, "initialization"),
            Phase::Predictor => write!(f, "predictor"),
            Phase::Corrector => write!(f, "corrector"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("point ({x}, {y}) lies outside the domain")]
    OutOfDomain { x: f64, y: f64 },

    #[error("ill-conditioned basis: Gram condition estimate {condition:e}")]
    IllConditionedBasis { condition: f64 },

    #[error("initialization did not converge after {iterations} iterations (last change {residual:e})")]
    InitializationFailure { iterations: usize, residual: f64 },

    #[error("non-finite values at step {step} ({phase})")]
    BlowUp { step: usize, phase: Phase },

    #[error("linear solve failed at step {step} ({phase}): {reason}")]
    SolverFailure { step: usize, phase: Phase, reason: String },

    #[error("convergence order undefined for errors {coarse:e} / {fine:e}")]
    UndefinedOrder { coarse: f64, fine: f64 },

    #[error("reference solver failed at step {step}: {reason}")]
    OracleFailure { step: usize, reason: String },

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
