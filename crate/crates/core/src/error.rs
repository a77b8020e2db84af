use std::path::PathBuf;

use thiserror::Error;

use crate::evidence::EvidenceError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Evidence(#[from] EvidenceError),

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("sensor at ({x:.3}, {y:.3}) lies outside the grid")]
    SensorOutsideGrid { x: f64, y: f64 },

    #[error("grid geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("pose ({x:.3}, {y:.3}) lies inside an obstacle")]
    PoseInObstacle { x: f64, y: f64 },

    #[error("infeasible trajectory: {0}")]
    InfeasibleTrajectory(String),

    #[error("recording does not support this run: {0}")]
    RecordingMismatch(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed {what}: {detail}")]
    Format {
        path: PathBuf,
        what: &'static str,
        detail: String,
    },

    #[error("{path}: invalid configuration: {detail}")]
    Config { path: PathBuf, detail: String },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, what: &'static str, detail: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            what,
            detail: detail.into(),
        }
    }
}
