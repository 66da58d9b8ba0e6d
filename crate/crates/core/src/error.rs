//! Error type shared across the crate.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("malformed metadata: {0}")]
    Meta(String),

    #[error("angular resolution must be odd and >= 3, got {0}")]
    EvenAngularResolution(usize),

    #[error("view count mismatch: expected {expected}, found {found}")]
    ViewCountMismatch { expected: usize, found: usize },

    #[error("view dimensions inconsistent: {0}")]
    InconsistentViews(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("malformed PFM: {0}")]
    MalformedPfm(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("scene layers out of order: {0}")]
    LayerOrder(String),

    #[error("evaluation mask is empty")]
    EmptyMask,
}
