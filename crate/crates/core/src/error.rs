use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A time was requested that is not a knot of the path's grid.
    #[error("time {t} is not a knot of the grid")]
    OffGrid { t: f64 },

    /// A refinement grid does not contain every knot of the coarse path.
    #[error("refinement grid is missing original knot {t}")]
    RefinementMismatch { t: f64 },

    /// An evaluator tried to read the path past its filtration cutoff.
    #[error("read at time {requested} beyond prefix cutoff {cutoff}")]
    PrefixViolation { requested: f64, cutoff: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("check `{check}` is not applicable: {reason}")]
    InapplicableCheck { check: String, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

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
}
