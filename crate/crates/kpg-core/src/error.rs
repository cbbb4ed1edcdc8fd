use thiserror::Error;

/// Errors raised by game construction, oracles, solvers, and estimators.
///
/// The variants are grouped by how a caller should react: `InvalidInput` and
/// `DimensionMismatch` mean the request itself was malformed and should be
/// rejected; the remaining variants mean a computation started and then hit a
/// numeric or geometric problem.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix did not have the shape the operation requires.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A precondition on the inputs was violated (bad hyperparameter,
    /// non-definite matrix, invalid probability table, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An evaluation produced a non-finite value or a linear system could not
    /// be solved.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A game configuration reached a point where its defining geometry is
    /// undefined (e.g. two agents occupying the same position).
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
}

pub type Result<T> = std::result::Result<T, Error>;
