use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
///
/// The variants fall into three classes that the command line maps to exit
/// codes: validation (2), unsatisfiable parameter searches (3) and I/O (4).
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid sequence spec `{spec}`: {reason}")]
    SeqSpec { spec: String, reason: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("empty support: no n <= {horizon} has p_n > 0")]
    EmptySupport { horizon: u64 },

    #[error("unsatisfiable parameters: {0}")]
    Unsatisfiable(String),

    #[error("support gcd is {0}; the red-site construction requires gcd 1")]
    GcdNotOne(u64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed csv: {0}")]
    Csv(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Error class used for exit codes and stderr reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Unsatisfiable,
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Validation => 2,
            ErrorClass::Unsatisfiable => 3,
            ErrorClass::Io => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorClass::Validation => "validation",
            ErrorClass::Unsatisfiable => "unsatisfiable",
            ErrorClass::Io => "io",
        }
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::EmptySupport { .. } | Error::Unsatisfiable(_) | Error::GcdNotOne(_) => ErrorClass::Unsatisfiable,
            Error::Io { .. } => ErrorClass::Io,
            _ => ErrorClass::Validation,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
