use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the retrieval engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .path.display())]
    FileNotFound { path: PathBuf },

    #[error("unsupported image format: {}", .path.display())]
    UnsupportedFormat { path: PathBuf },

    #[error("corrupt image {}: {reason}", .path.display())]
    CorruptImage { path: PathBuf, reason: String },

    #[error("raster dimensions {width}x{height} do not match {len} samples")]
    DimensionMismatch {
        width: usize,
        height: usize,
        len: usize,
    },

    #[error("plane is empty")]
    EmptyPlane,

    #[error("directory not found: {}", .path.display())]
    DirectoryNotFound { path: PathBuf },

    #[error("no decodable images found in {}", .path.display())]
    NoImagesFound { path: PathBuf },

    #[error("invalid image name {name:?}: {reason}")]
    InvalidName { name: String, reason: &'static str },

    #[error("duplicate image name {0:?}")]
    DuplicateName(String),

    #[error("I/O error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed feature file at line {line}: {reason}")]
    MalformedFeatureFile { line: u64, reason: String },

    #[error("unknown image {0:?}")]
    UnknownImage(String),

    #[error("no indexed image shares threshold {threshold}")]
    EmptyGroup { threshold: u64 },

    #[error("invalid query: {0}")]
    InvalidSpec(String),
}

impl Error {
    /// True for errors caused by bad input (paths, names, flags, files)
    /// rather than by the engine itself.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::DimensionMismatch { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
