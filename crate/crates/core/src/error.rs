use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate labels: need at least one positive and one negative example")]
    DegenerateLabels,

    #[error("no breakpoints")]
    NoBreakpoints,

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    #[error("step size {0} is outside the explored range of the path")]
    OutsideExploredRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A sweep invariant failed; indicates a bug or queue corruption.
    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(row: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            row,
            message: message.into(),
        }
    }

    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad input or configuration (as opposed to
    /// violated internal invariants).
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Internal(_) => false,
            Error::File { source, .. } => source.is_input_error(),
            _ => true,
        }
    }
}
