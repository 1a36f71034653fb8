use std::path::PathBuf;

/// Errors raised by the watermarking toolkit.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("expected a {expected}-channel raster, got {actual} channel(s)")]
    ChannelCount { expected: usize, actual: usize },

    #[error("raster is already grayscale")]
    AlreadyGrayscale,

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("invalid dimensions {height}x{width}: {reason}")]
    InvalidDimensions {
        height: usize,
        width: usize,
        reason: &'static str,
    },

    #[error("unsupported block size {0} (expected 2 or 8)")]
    UnsupportedBlockSize(usize),

    #[error("JPEG quality factor {0} outside 1..=100")]
    QualityOutOfRange(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("transform is singular")]
    SingularTransform,

    #[error("implausible transform: scale {scale:.3}, anisotropy {anisotropy:.3}")]
    ImplausibleTransform { scale: f64, anisotropy: f64 },

    #[error("insufficient matches for registration: {found} found, {required} required")]
    InsufficientMatches { found: usize, required: usize },

    #[error("training diverged after {epochs} epoch(s)")]
    TrainingDiverged { epochs: usize },

    #[error("unsupported bit depth in {path}")]
    UnsupportedBitDepth { path: PathBuf },

    #[error("unsupported image format: {path}")]
    UnsupportedFormat { path: PathBuf },

    #[error("attack spec parse error: {0}")]
    AttackSyntax(String),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
