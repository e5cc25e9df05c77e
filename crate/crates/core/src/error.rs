//! Error type shared across the crate.

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// Structural problem in a CSV file (bad header, ragged row, duplicate id).
    #[error("{}:{line}: {message}", path.display())]
    Malformed {
        path: PathBuf,
        /// 1-based line number.
        line: usize,
        message: String,
    },

    /// A single cell failed to parse or is not finite.
    #[error("{}:{line}: column {column}: {message}", path.display())]
    BadValue {
        path: PathBuf,
        /// 1-based line number.
        line: usize,
        /// 1-based column number within the line.
        column: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    /// A parameter or precondition violation.
    #[error("{0}")]
    Invalid(String),

    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: String,
        expected: String,
        actual: String,
    },

    /// A required record, file, or model is absent.
    #[error("missing {0}")]
    Missing(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// The regression system could not be factorized.
    #[error("singular system at lambda = {lambda}; increase the regularization strength")]
    Singular { lambda: f64 },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn missing(what: impl Into<String>) -> Self {
        Error::Missing(what.into())
    }

    pub fn shape(
        context: impl Into<String>,
        expected: impl Into<String>,
        actual: impl Into<String>,
    ) -> Self {
        Error::Shape {
            context: context.into(),
            expected: expected.into(),
            actual: actual.into(),
        }
    }
}
