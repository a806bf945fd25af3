use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    /// Input data violates a structural requirement (ids, weights, shapes).
    #[error("invalid data: {0}")]
    Data(String),

    /// Invalid parameter or configuration value.
    #[error("invalid argument: {0}")]
    Usage(String),

    #[error("dimension mismatch: {0}")]
    Shape(String),

    /// Numerically degenerate input, e.g. a rank-deficient projection.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("checkpoint format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end:
    /// 1 usage error, 2 data error, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Numeric(_) => 3,
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::Data(_)
            | Error::Shape(_)
            | Error::Format(_) => 2,
        }
    }
}
