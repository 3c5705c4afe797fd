use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the ground-truth pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pose: {0}")]
    InvalidPose(String),
    #[error("matrix is not a rigid transform: {0}")]
    NotRigid(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("frame mismatch: expected `{expected}`, found `{found}`")]
    FrameMismatch { expected: String, found: String },
    #[error("point ({x}, {y}, {z}) at index {index} falls outside the raster")]
    OutOfBounds { index: usize, x: f64, y: f64, z: f64 },
    #[error("image shape mismatch: {0}")]
    Shape(String),
    #[error("image too small: {0}")]
    TooSmall(String),
    #[error("no pose within {max_gap_ns} ns of {query_ns} (closest gap {gap_ns} ns)")]
    GapExceeded { query_ns: i64, gap_ns: i64, max_gap_ns: i64 },
    #[error("malformed {what}: {msg}")]
    Parse { what: &'static str, msg: String },
    #[error("malformed manifest at line {line}: {msg}")]
    ManifestLine { line: usize, msg: String },
    #[error("pose origin is inside box {0}")]
    PoseInsideObject(usize),
    #[error("missing candidate images: {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    MissingCandidates(Vec<PathBuf>),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(what: &'static str, msg: impl Into<String>) -> Self {
        Error::Parse { what, msg: msg.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
