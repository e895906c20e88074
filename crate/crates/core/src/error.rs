use std::path::PathBuf;

use thiserror::Error;

/// Every failure the workbench can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate geometry: atoms {0} and {1} coincide")]
    DegenerateGeometry(usize, usize),

    #[error("unsupported basis: {0}")]
    UnsupportedBasis(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("basis is linearly dependent (smallest overlap eigenvalue {0:e})")]
    LinearDependence(f64),

    #[error("scan failed: {0}")]
    Scan(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record {path}: {message}")]
    Record { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 usage, 2 computation, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Parse { .. } | Error::UnsupportedBasis(_) => 1,
            Error::Io { .. } | Error::Record { .. } => 3,
            Error::Domain(_)
            | Error::DegenerateGeometry(..)
            | Error::Resource(_)
            | Error::LinearDependence(_)
            | Error::Scan(_) => 2,
        }
    }
}
