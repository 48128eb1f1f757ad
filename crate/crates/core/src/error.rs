use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the detection pipeline and its building blocks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("failed to write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported raster format: {0}")]
    UnsupportedFormat(String),
    #[error("image has zero size")]
    EmptyImage,
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no valid pixels in input")]
    NoValidPixels,
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),
    #[error("roll energy is flat over the search interval")]
    FlatEnergy,
    #[error("road model unidentifiable: varkappa is zero")]
    VarkappaZero,
    #[error("histogram has mass in fewer than two bins")]
    DegenerateHistogram,
    #[error("insufficient points: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("RANSAC found no consensus: best inlier set {best} < {required}")]
    NoConsensus { best: usize, required: usize },
    #[error("surface frame does not match the input representation")]
    FrameMismatch,
    #[error("point cloud is empty: no pixel passed the disparity cut")]
    EmptyCloud,
    #[error("fewer than {needed} road pixels survived thresholding ({got})")]
    EmptyRoadMask { needed: usize, got: usize },
    #[error("scene produces a negative disparity at ({u}, {v})")]
    NegativeDisparity { u: usize, v: usize },
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
    #[error("unknown dataset layout: {0}")]
    UnknownLayout(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
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
