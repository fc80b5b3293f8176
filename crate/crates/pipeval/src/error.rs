//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported bit depth {0} (expected 2, 4 or 8)")]
    UnsupportedBitDepth(u8),

    #[error("expected 8-bit input, got bit depth {0}")]
    ExpectedEightBit(u8),

    #[error("invalid gamma {0} (must be > 0)")]
    InvalidGamma(f64),

    #[error("gamma requires an RGB, GRAY or BGRNE buffer, got {0}")]
    GammaColorModel(&'static str),

    #[error("unsupported color conversion {from} -> {to}")]
    UnsupportedColorConversion { from: &'static str, to: &'static str },

    #[error("invalid jpeg quality {0} (must be 1..=100)")]
    InvalidJpegQuality(u16),

    #[error("jpeg supports 1 or 3 channels, got {0} (convert BGRNE to RGB or per-band files first)")]
    JpegChannels(u8),

    #[error("png supports 1 or 3 channels, got {0} (use qraw or per-band files)")]
    PngChannels(u8),

    #[error("distortion coefficient k1={0} out of range (|k1| must be <= 0.5)")]
    DistortionOutOfRange(f64),

    #[error("resize target side {0} too small (minimum 8)")]
    ResizeTargetTooSmall(u32),

    #[error("scale factor {0} out of range (must be in (0, 4])")]
    ScaleFactorOutOfRange(f64),

    #[error("multispectral fusion needs 5 bands, got {0}")]
    BandCount(usize),

    #[error("band {index} has dims {got_w}x{got_h}, expected {want_w}x{want_h}")]
    BandDimsMismatch { index: usize, got_w: u32, got_h: u32, want_w: u32, want_h: u32 },

    #[error("band {0} must be a single-channel 8-bit buffer")]
    BandFormat(usize),

    #[error("invalid image buffer: {0}")]
    InvalidBuffer(String),

    #[error("sample value {value} at index {index} is not on the {bits}-bit level set")]
    OffLevelSet { value: u8, index: usize, bits: u8 },

    #[error("corrupt {format} stream at byte {offset}: {reason}")]
    CorruptStream { format: &'static str, offset: usize, reason: String },

    #[error("image codec error: {0}")]
    Codec(String),

    #[error("annotation schema error: {0}")]
    Schema(String),

    #[error("unknown image id {0}")]
    UnknownImageId(i64),

    #[error("unknown category id {0}")]
    UnknownCategoryId(i64),

    #[error("no counterpart for '{stem}' in {dir}")]
    MissingCounterpart { stem: String, dir: PathBuf },

    #[error("sweep grid has {n} configurations, above the cap of {cap} (raise --cap to allow)")]
    SweepCapExceeded { n: usize, cap: usize },

    #[error("unknown preset '{0}' (known: baseline, optimized, paper-grid)")]
    UnknownPreset(String),

    #[error("config parse error at line {line}: {reason}")]
    ConfigParse { line: usize, reason: String },

    #[error("detector spec '{0}' is invalid: {1}")]
    DetectorSpec(String, String),

    #[error("detector failed on {image}: {reason}")]
    DetectorFailed { image: String, reason: String },

    #[error("detector error rate {failed}/{total} exceeds 10%, aborting run")]
    DetectorErrorRate { failed: usize, total: usize },

    #[error("benchmark reports compare different corpora ({0} vs {1})")]
    CorpusMismatch(String, String),

    #[error("report has no rows")]
    EmptyReport,

    #[error("{path}: {source}")]
    IoAt {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io_at(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::IoAt { path, source }
    }
}
