use thiserror::Error;

use crate::pgm::PgmError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Pgm(#[from] PgmError),

    #[error("image must have at least one pixel")]
    EmptyImage,

    #[error("pixel buffer holds {actual} samples, expected {expected}")]
    BufferSize { expected: usize, actual: usize },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("crop to {requested:?} exceeds image size {available:?}")]
    CropOutOfBounds {
        requested: (usize, usize),
        available: (usize, usize),
    },

    #[error("invalid block size {width}x{height}: both sides must be at least 2")]
    InvalidBlock { width: usize, height: usize },

    #[error("image {width}x{height} is smaller than 2x2")]
    ImageTooSmall { width: usize, height: usize },

    #[error("cannot select a threshold for an empty region")]
    EmptyRegion,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
