use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the texnoise library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ROI out of bounds: {axis} coordinate {origin} + side {side} exceeds image extent {extent}")]
    RoiOutOfBounds {
        axis: &'static str,
        origin: usize,
        side: usize,
        extent: usize,
    },

    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("histograms are defined over different bin grids")]
    GridMismatch,

    #[error("degenerate noise: background region has zero variance")]
    DegenerateNoise,

    #[error("incomplete input: {0}")]
    IncompleteInput(String),

    #[error("format error in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
