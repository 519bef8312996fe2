use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a precondition (shape, range, unit norm, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative routine failed to converge or two computation routes disagreed.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A constructed object failed one of its own invariants.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
