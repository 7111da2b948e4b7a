use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the enhancement library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("data format error: {0}")]
    Format(String),

    /// Arrays handed to a transform do not fit together.
    #[error("shape mismatch: {0}")]
    Shape(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
