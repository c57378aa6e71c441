use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Arguments that are malformed regardless of data (bad sizes, nonpositive scales).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A documented precondition does not hold for the supplied objects.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The data itself is unusable (nonpositive weights, stencils that do not fit).
    #[error("data error: {0}")]
    Data(String),
    /// A root search or bracket expansion did not converge.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// An object could not be built with the requested parameters.
    #[error("construction failed: {0}")]
    Construction(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
