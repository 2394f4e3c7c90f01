use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the segmentation stages and their I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read image {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported or corrupt image {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("image has zero width or height")]
    EmptyImage,

    #[error("failed to write {path}: {message}")]
    Write { path: PathBuf, message: String },

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("buffer length {actual} does not match {width}x{height} (expected {expected})")]
    BufferLength {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },

    #[error("value {value} outside [0, 1]")]
    OutOfRange { value: f64 },

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("kernel of size {size} exceeds twice the image extent {width}x{height}")]
    KernelTooLarge {
        size: usize,
        width: usize,
        height: usize,
    },

    #[error("histogram has {nonempty} non-empty bin(s); no split is possible")]
    DegenerateHistogram { nonempty: usize },

    #[error("point ({x}, {y}) lies outside a {width}x{height} mask")]
    PointOutOfBounds {
        x: u32,
        y: u32,
        width: usize,
        height: usize,
    },

    #[error(transparent)]
    Config(#[from] crate::pipeline::ConfigError),

    #[error("no image in the batch could be analyzed ({failures} failure(s))")]
    BatchFailed { failures: usize },

    #[error("batch is empty")]
    EmptyBatch,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
