use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("placement infeasible: could not satisfy {constraint} after {attempts} attempts")]
    PlacementInfeasible {
        constraint: &'static str,
        attempts: usize,
    },
    #[error("distance {d_2d_m} m outside the path-loss model range [10, 5000] m")]
    ModelRange { d_2d_m: f64 },
    #[error("format error at byte offset {offset}: {message}")]
    Format { offset: u64, message: String },
    #[error("training diverged at epoch {epoch}, batch {batch}: loss is not finite")]
    Divergence { epoch: usize, batch: usize },
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
