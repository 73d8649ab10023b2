use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("corrupt image stream: {0}")]
    CorruptStream(String),

    #[error("unsupported image format")]
    UnsupportedFormat,

    #[error("expected {expected} channel(s), got {actual}")]
    WrongChannelCount { expected: usize, actual: usize },

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("invalid image buffer: {0}")]
    InvalidBuffer(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("histogram is empty")]
    EmptyHistogram,

    #[error("mixture model has no fitted components")]
    UnfittedModel,

    #[error("mask has no foreground and no uncertain band")]
    DegenerateMask,

    #[error("image has {0} distinct colors, not a segmentation map")]
    TooManyColors(usize),

    #[error("invalid augmentation policy: {0}")]
    InvalidPolicy(String),

    #[error("no cache entry for image {0}")]
    MissingEntry(String),

    #[error("stale cache entry {hash}: map is {map:?}, image is {image:?}")]
    StaleEntry {
        hash: String,
        map: (usize, usize),
        image: (usize, usize),
    },

    #[error("cache manifest not found at {0}")]
    ManifestMissing(PathBuf),

    #[error("cache was built with params {manifest}, requested {requested}")]
    ParamsMismatch { manifest: String, requested: String },

    #[error("unsupported version: {0}")]
    VersionMismatch(String),

    #[error("malformed {what} at line {line}: {reason}")]
    Parse {
        what: &'static str,
        line: usize,
        reason: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
