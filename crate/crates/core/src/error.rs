use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration file or value is missing, malformed or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// Input data violates a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// A cell of an input file could not be parsed. Rows are 1-based data rows.
    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    /// Stratified splitting is impossible for the given data.
    #[error("split error: {0}")]
    Split(String),

    /// A learner was asked to fit data it cannot fit (e.g. one class only).
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// A correction method could not produce a result.
    #[error("correction error: {0}")]
    Correction(String),

    #[error("fetch error: {0}")]
    Fetch(String),

    #[error("HTTP status {status} while fetching {url}")]
    HttpStatus { status: u16, url: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for errors caused by user input (configs, data files, arguments)
    /// as opposed to failures while doing the work.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Validation(_) | Error::Parse { .. } | Error::Split(_)
        )
    }
}
