use std::path::PathBuf;

use thiserror::Error;

use crate::ingestion::patch::PatchError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value failed a domain invariant (coordinate range, soil moisture range, ...).
    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },

    /// A date string could not be parsed as `YYYY-MM-DD`.
    #[error("unparseable date {input:?}: expected YYYY-MM-DD")]
    DateFormat { input: String },

    /// A row in an input file was rejected.
    #[error("{path}:{line}: {message}")]
    Load {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("patch {path}: {source}")]
    Patch {
        path: PathBuf,
        #[source]
        source: PatchError,
    },

    /// Inconsistent or impossible run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Feature schema at prediction time differs from the fitted schema.
    #[error("schema mismatch: missing columns {missing:?}, unexpected columns {extra:?}")]
    Schema {
        missing: Vec<String>,
        extra: Vec<String>,
    },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 validation, 2 configuration, 3 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) => 2,
            Error::Io { .. } => 3,
            _ => 1,
        }
    }
}
