//! Crate-wide error type.
//!
//! Errors fall into two operational classes that the CLI maps to distinct
//! exit codes: configuration problems (bad parameters, malformed files,
//! shape mismatches — exit code 2) and numerical failures (divergent
//! quadrature, non-finite training loss, singular matrices — exit code 3).

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid parameters or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Mismatched lengths or dimensions in numeric containers.
    #[error("shape error: {0}")]
    Shape(String),

    /// A numerical procedure failed to produce a usable result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Training produced a non-finite loss. Carries the per-epoch loss
    /// history accumulated up to the last finite value.
    #[error("training diverged: non-finite loss at epoch {epoch}")]
    TrainingDiverged { epoch: usize, history: Vec<f64> },

    /// A persisted file could not be parsed; names the offending
    /// location as precisely as the underlying parser allows.
    #[error("parse error in {path}: {detail}")]
    Parse { path: PathBuf, detail: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn parse(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), detail: detail.into() }
    }

    /// Prefixes message-carrying variants with where the failure arose
    /// (e.g. which model row), preserving the variant and exit class.
    /// Variants with structured payloads pass through unchanged.
    pub fn with_context(self, ctx: impl AsRef<str>) -> Self {
        let ctx = ctx.as_ref();
        match self {
            Error::Config(m) => Error::Config(format!("{ctx}: {m}")),
            Error::Shape(m) => Error::Shape(format!("{ctx}: {m}")),
            Error::Numerical(m) => Error::Numerical(format!("{ctx}: {m}")),
            Error::Parse { path, detail } => {
                Error::Parse { path, detail: format!("{ctx}: {detail}") }
            }
            other => other,
        }
    }

    /// Process exit code for the CLI: 2 for configuration-class errors,
    /// 3 for numerical-class errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) | Error::TrainingDiverged { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
