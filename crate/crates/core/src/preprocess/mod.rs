//! Image ingestion, global binarization and skew correction.

mod image;
pub mod pgm;
mod otsu;
mod skew;

use thiserror::Error;

pub use image::{BinaryImage, GrayImage};
pub use otsu::{binarize, otsu_threshold};
pub use pgm::{decode_pgm, encode_pgm, read_pgm, write_pgm};
pub use skew::{
    deskew, detect_skew, rotate, rotate_point, SkewEstimate, DEFAULT_SKEW_THRESHOLD,
    SKEW_SEARCH_RANGE, SKEW_STEP,
};

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("invalid image dimensions {width}x{height} for {len} pixels")]
    InvalidDimensions { width: usize, height: usize, len: usize },
    #[error("histogram is empty")]
    EmptyHistogram,
    #[error("image has a single intensity; no foreground/background split exists")]
    ZeroVariance,
    #[error("image has no foreground pixels")]
    NoContent,
    #[error("malformed PGM: {0}")]
    Pgm(String),
    #[error("malformed histogram: {0}")]
    Histogram(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
