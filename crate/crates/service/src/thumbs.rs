//! Lazily generated JPEG thumbnails, cached on disk.
//!
//! Cache entries are keyed by image name and source modification time, so
//! a changed source file gets a fresh thumbnail. Writers go through a
//! temporary file in the cache directory followed by a rename; concurrent
//! misses for one key may both render, and the last rename wins with
//! identical bytes.

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::UNIX_EPOCH;

use image::codecs::jpeg::JpegEncoder;
use sha2::{Digest, Sha256};

/// Longest side of a generated thumbnail, in pixels.
pub const THUMBNAIL_SIZE: u32 = 256;

const JPEG_QUALITY: u8 = 85;

#[derive(Debug, thiserror::Error)]
pub enum ThumbError {
    #[error("source image {} is no longer available", .0.display())]
    SourceMissing(PathBuf),

    #[error("cannot render thumbnail for {}: {reason}", .path.display())]
    Render { path: PathBuf, reason: String },

    #[error("thumbnail cache: {0}")]
    Cache(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct ThumbnailCache {
    dir: PathBuf,
}

impl ThumbnailCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ThumbnailCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Returns JPEG bytes for `source`, rendering and caching on a miss.
    pub fn get(&self, name: &str, source: &Path) -> Result<Vec<u8>, ThumbError> {
        let meta = std::fs::metadata(source)
            .map_err(|_| ThumbError::SourceMissing(source.to_path_buf()))?;
        let mtime = meta
            .modified()
            .ok()
            .and_then(|t| t.duration_since(UNIX_EPOCH).ok())
            .map_or(0, |d| d.as_nanos());

        let mut hasher = Sha256::new();
        hasher.update(name.as_bytes());
        hasher.update([0]);
        hasher.update(mtime.to_le_bytes());
        let cached = self.dir.join(format!("{}.jpg", hex::encode(hasher.finalize())));

        if let Ok(bytes) = std::fs::read(&cached) {
            return Ok(bytes);
        }

        let bytes = render(source)?;
        std::fs::create_dir_all(&self.dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(&bytes)?;
        tmp.persist(&cached).map_err(|e| ThumbError::Cache(e.error))?;
        Ok(bytes)
    }
}

fn render(source: &Path) -> Result<Vec<u8>, ThumbError> {
    let render_err = |reason: String| ThumbError::Render {
        path: source.to_path_buf(),
        reason,
    };
    let img = image::open(source).map_err(|e| match e {
        image::ImageError::IoError(ref io) if io.kind() == std::io::ErrorKind::NotFound => {
            ThumbError::SourceMissing(source.to_path_buf())
        }
        other => render_err(other.to_string()),
    })?;
    let thumb = if img.width().max(img.height()) > THUMBNAIL_SIZE {
        img.thumbnail(THUMBNAIL_SIZE, THUMBNAIL_SIZE)
    } else {
        img
    };
    let rgb = thumb.to_rgb8();
    let mut out = Vec::new();
    JpegEncoder::new_with_quality(BufWriter::new(&mut out), JPEG_QUALITY)
        .encode_image(&rgb)
        .map_err(|e| render_err(e.to_string()))?;
    Ok(out)
}
