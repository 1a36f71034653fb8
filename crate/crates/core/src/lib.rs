//! Semi-fragile image watermarking: lifting-wavelet DC embedding, halftone
//! digests, feature-based re-registration, neural watermark extraction,
//! tamper localization and digest-based recovery.

pub mod attacks;
pub mod authenticator;
pub mod embedder;
pub mod error;
pub mod filter;
pub mod fnn;
pub mod halftone;
pub mod imaging;
pub mod metrics;
pub mod pipeline;
pub mod registration;
pub mod transforms;

pub use error::{Error, Result};
pub use imaging::{BitMatrix, Plane, Raster};
