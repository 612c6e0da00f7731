use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed image: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("{path}: unsupported bit depth {depth} (only 8-bit images are supported)")]
    UnsupportedBitDepth { path: PathBuf, depth: u32 },

    #[error("{path}: unsupported image format")]
    UnsupportedFormat { path: PathBuf },

    #[error("png encoder: {0}")]
    Encode(String),

    #[error("invalid raster: {0}")]
    InvalidRaster(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("scale factor must be a finite number greater than 1, got {0}")]
    InvalidFactor(f64),

    #[error("image too small: {width}x{height} yields no output pixel at factor {factor}")]
    ImageTooSmall { width: usize, height: usize, factor: f64 },

    #[error("neighborhood radius k={k} out of range 1..={max}")]
    InvalidRadius { k: usize, max: usize },

    #[error("alpha must be finite with |alpha| <= 50, got {0}")]
    InvalidAlpha(f64),

    #[error("profiles disagree on neighborhood radius ({0} vs {1})")]
    RadiusMismatch(usize, usize),

    #[error("no profiles to merge")]
    NoProfiles,

    #[error("image {width}x{height} is smaller than the {window}x{window} SSIM window")]
    WindowTooLarge { width: usize, height: usize, window: usize },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by bad arguments or configuration rather than
    /// by the environment. The CLI maps these to exit status 2.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidFactor(_)
                | Error::ImageTooSmall { .. }
                | Error::InvalidRadius { .. }
                | Error::InvalidAlpha(_)
                | Error::DimensionMismatch(_)
                | Error::WindowTooLarge { .. }
                | Error::Config(_)
        )
    }
}
