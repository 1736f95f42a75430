//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration failure: {0}")]
    Integration(String),

    #[error("linear solve failed: {0}")]
    Singular(String),

    #[error("steady state is not unique: {0}")]
    DegenerateSteadyState(String),

    #[error("series did not converge: {0}")]
    NonConvergent(String),

    #[error("state invariant violated: {0}")]
    InvariantViolation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
