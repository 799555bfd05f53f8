use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The input has no full-dimensional simplex. `extremes` carries the
    /// point ids that span the degenerate input (e.g. the two ends of a
    /// collinear 2D set).
    #[error("degenerate input: {reason}")]
    Degenerate { reason: String, extremes: Vec<usize> },

    /// A structural invariant was violated; this signals a caller bug or a
    /// numerical breakdown, never bad user input.
    #[error("internal consistency: {0}")]
    Internal(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn degenerate(reason: impl Into<String>, extremes: Vec<usize>) -> Self {
        Error::Degenerate {
            reason: reason.into(),
            extremes,
        }
    }
}
