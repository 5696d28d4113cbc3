use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("failed to parse configuration: {0}")]
    Parse(String),

    #[error("point ({x}, {y}) lies outside the mesh")]
    OutOfDomain { x: f64, y: f64 },

    #[error(
        "linear solver did not converge after {iterations} iterations (residual {residual:e})"
    )]
    LinearSolver { iterations: usize, residual: f64 },

    #[error("Picard iteration did not converge after {iterations} iterations (change {change:e})")]
    Picard { iterations: usize, change: f64 },

    #[error("Newton iteration did not converge: {0}")]
    Newton(String),

    #[error("internal tracking error: {0}")]
    Tracking(String),

    #[error("unknown preset {name:?}; available: {}", .available.join(", "))]
    UnknownPreset {
        name: String,
        available: Vec<&'static str>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
