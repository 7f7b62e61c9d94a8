//! Error type shared by every module.

use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A corruption spec names an unknown kind or carries an out-of-range field.
    #[error("invalid corruption spec: {0}")]
    InvalidSpec(String),

    /// An operation parameter is out of its documented domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Mismatched or malformed input data (dimensions, label ids, buffer sizes).
    #[error("invalid input: {0}")]
    Input(String),

    /// A metric is undefined for the given data (empty matrix, zero denominator).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Bad configuration: unknown override key, empty filter, unparsable value.
    #[error("configuration error: {0}")]
    Config(String),

    /// Filesystem or codec failure, with the offending path.
    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Image decode/encode failure, with the offending path when known.
    #[error("image codec error{}: {message}", path_suffix(.path))]
    Codec {
        path: Option<PathBuf>,
        message: String,
    },
}

fn path_suffix(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => format!(" at {}", p.display()),
        None => String::new(),
    }
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error per the CLI contract:
    /// 2 for usage/config problems, 3 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Codec { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
