use thiserror::Error;

/// Errors raised by validation, evaluation and sampling routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A distribution parameter violates an invariant.
    #[error("invalid parameter: {0}")]
    Invalid(String),

    /// A numerical kernel could not reach the requested tolerance.
    #[error("accuracy failure: {0}")]
    Accuracy(String),

    /// A linear solve hit a (numerically) singular matrix.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// No closed-form density is available for the requested model.
    #[error("no closed form: {0}")]
    NoClosedForm(String),
}

pub type Result<T> = std::result::Result<T, Error>;
