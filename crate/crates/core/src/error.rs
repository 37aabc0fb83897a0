use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Geometry does not fit the pixel grid.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// Mismatched array or state dimensions.
    #[error("shape error: {0}")]
    Shape(String),
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The reference beam vanishes, so every phase step records the same frame.
    #[error("degenerate reference: {0}")]
    DegenerateReference(String),
    #[error("C0 estimation error: {0}")]
    Estimation(String),
    /// Without-replacement draw larger than the population.
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}
