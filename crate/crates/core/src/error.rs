use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A radicand or denominator in a closed-form expression left the real domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Caller violated an operation's precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A numerical result broke an invariant it is supposed to satisfy.
    #[error("numerical contract violated: {0}")]
    Contract(String),
    #[error("integration failed: {0}")]
    Integration(String),
    /// Eigenbranch matching between neighbouring parameter values was ambiguous.
    #[error("degenerate derivative: {0}")]
    DegenerateDerivative(String),
}

pub type Result<T> = std::result::Result<T, Error>;
