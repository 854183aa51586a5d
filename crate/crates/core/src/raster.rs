//! Decoded images and their channel-level views.
//!
//! Planes are stored row-major: sample `(row, col)` lives at
//! `row * width + col`. Column-wise statistics walk the plane with a
//! stride of `width`.

use std::io::ErrorKind;
use std::path::Path;

use image::{DynamicImage, ImageFormat, ImageReader};

use crate::error::{Error, Result};

/// ITU-R BT.601 luma weights.
pub const GRAY_WEIGHTS: [f64; 3] = [0.2989, 0.5870, 0.1140];

/// A single matrix of samples with explicit dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane<T = u8> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Copy> Plane<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::DimensionMismatch {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Plane {
            width,
            height,
            data,
        })
    }

    /// Builds a plane from a list of rows. All rows must have the same length.
    pub fn from_rows(rows: &[&[T]]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(width * height);
        for row in rows {
            if row.len() != width {
                return Err(Error::DimensionMismatch {
                    width,
                    height,
                    len: data.len() + row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Plane::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.width + col]
    }

    /// Iterates the samples of column `col` from top to bottom.
    pub fn column(&self, col: usize) -> impl Iterator<Item = T> + '_ {
        self.data[col..].iter().step_by(self.width).copied()
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Plane<U> {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn into_samples(self) -> Vec<T> {
        self.data
    }
}

/// A true-color image held as three 8-bit channel planes.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbRaster {
    width: usize,
    height: usize,
    red: Vec<u8>,
    green: Vec<u8>,
    blue: Vec<u8>,
}

impl RgbRaster {
    pub fn from_planes(
        width: usize,
        height: usize,
        red: Vec<u8>,
        green: Vec<u8>,
        blue: Vec<u8>,
    ) -> Result<Self> {
        let n = width * height;
        for len in [red.len(), green.len(), blue.len()] {
            if width == 0 || height == 0 || len != n {
                return Err(Error::DimensionMismatch { width, height, len });
            }
        }
        Ok(RgbRaster {
            width,
            height,
            red,
            green,
            blue,
        })
    }

    /// Builds a raster from interleaved `RGBRGB...` bytes.
    pub fn from_rgb(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        Self::from_interleaved(width, height, rgb, 3)
    }

    /// Builds a raster from interleaved `RGBARGBA...` bytes, dropping alpha.
    pub fn from_rgba(width: usize, height: usize, rgba: &[u8]) -> Result<Self> {
        Self::from_interleaved(width, height, rgba, 4)
    }

    fn from_interleaved(width: usize, height: usize, bytes: &[u8], stride: usize) -> Result<Self> {
        if width == 0 || height == 0 || bytes.len() != width * height * stride {
            return Err(Error::DimensionMismatch {
                width,
                height,
                len: bytes.len() / stride,
            });
        }
        let n = width * height;
        let mut red = Vec::with_capacity(n);
        let mut green = Vec::with_capacity(n);
        let mut blue = Vec::with_capacity(n);
        for px in bytes.chunks_exact(stride) {
            red.push(px[0]);
            green.push(px[1]);
            blue.push(px[2]);
        }
        Self::from_planes(width, height, red, green, blue)
    }

    /// A raster where every pixel is `(r, g, b)`.
    pub fn constant(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        let n = width * height;
        Self::from_planes(width, height, vec![rgb[0]; n], vec![rgb[1]; n], vec![rgb[2]; n])
    }

    pub fn from_dynamic(img: &DynamicImage) -> Result<Self> {
        // to_rgb8 replicates luma into all three channels, expands palettes
        // and drops alpha.
        let rgb = img.to_rgb8();
        Self::from_rgb(rgb.width() as usize, rgb.height() as usize, rgb.as_raw())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn red(&self) -> &[u8] {
        &self.red
    }

    pub fn green(&self) -> &[u8] {
        &self.green
    }

    pub fn blue(&self) -> &[u8] {
        &self.blue
    }

    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        let i = row * self.width + col;
        [self.red[i], self.green[i], self.blue[i]]
    }

    /// Re-interleaves the planes as `RGBRGB...` bytes.
    pub fn to_rgb_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.pixel_count() * 3);
        for i in 0..self.pixel_count() {
            out.extend_from_slice(&[self.red[i], self.green[i], self.blue[i]]);
        }
        out
    }
}

/// An 8-bit intensity image.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayRaster {
    width: usize,
    height: usize,
    gray: Vec<u8>,
}

impl GrayRaster {
    pub fn new(width: usize, height: usize, gray: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || gray.len() != width * height {
            return Err(Error::DimensionMismatch {
                width,
                height,
                len: gray.len(),
            });
        }
        Ok(GrayRaster {
            width,
            height,
            gray,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.gray
    }
}

/// Counts of gray samples per intensity level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram256 {
    pub bins: [u64; 256],
}

impl Histogram256 {
    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }
}

/// Reads a JPEG, PNG or BMP file into an [`RgbRaster`].
pub fn decode(path: impl AsRef<Path>) -> Result<RgbRaster> {
    let path = path.as_ref();
    let reader = ImageReader::open(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => Error::FileNotFound {
            path: path.to_path_buf(),
        },
        _ => Error::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })?;
    let reader = reader.with_guessed_format().map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    match reader.format() {
        Some(ImageFormat::Jpeg | ImageFormat::Png | ImageFormat::Bmp) => {}
        _ => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
            })
        }
    }
    let img = reader.decode().map_err(|e| Error::CorruptImage {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    RgbRaster::from_dynamic(&img)
}

/// Splits a raster into independent red, green and blue planes.
pub fn split_channels(img: &RgbRaster) -> (Plane, Plane, Plane) {
    let (w, h) = (img.width, img.height);
    let plane = |data: &[u8]| Plane {
        width: w,
        height: h,
        data: data.to_vec(),
    };
    (plane(&img.red), plane(&img.green), plane(&img.blue))
}

/// Weighted luma of one pixel, rounded half away from zero.
pub fn gray_level(rgb: [u8; 3]) -> u8 {
    let y = GRAY_WEIGHTS[0] * f64::from(rgb[0])
        + GRAY_WEIGHTS[1] * f64::from(rgb[1])
        + GRAY_WEIGHTS[2] * f64::from(rgb[2]);
    y.round().clamp(0.0, 255.0) as u8
}

pub fn to_gray(img: &RgbRaster) -> GrayRaster {
    let gray = (0..img.pixel_count())
        .map(|i| gray_level([img.red[i], img.green[i], img.blue[i]]))
        .collect();
    GrayRaster {
        width: img.width,
        height: img.height,
        gray,
    }
}

pub fn histogram(g: &GrayRaster) -> Histogram256 {
    let mut bins = [0u64; 256];
    for &v in &g.gray {
        bins[v as usize] += 1;
    }
    Histogram256 { bins }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raster_from_pixels(width: usize, height: usize, px: &[[u8; 3]]) -> RgbRaster {
        let bytes: Vec<u8> = px.iter().flatten().copied().collect();
        RgbRaster::from_rgb(width, height, &bytes).unwrap()
    }

    #[test]
    fn split_constant_raster() {
        let img = RgbRaster::constant(4, 3, [10, 20, 30]).unwrap();
        let (r, g, b) = split_channels(&img);
        assert!(r.samples().iter().all(|&v| v == 10));
        assert!(g.samples().iter().all(|&v| v == 20));
        assert!(b.samples().iter().all(|&v| v == 30));
        for p in [&r, &g, &b] {
            assert_eq!(p.samples().len(), 12);
            assert_eq!((p.width(), p.height()), (4, 3));
        }
    }

    #[test]
    fn split_indexes_directly() {
        let img = raster_from_pixels(2, 1, &[[1, 2, 3], [4, 5, 6]]);
        let (r, g, b) = split_channels(&img);
        assert_eq!(r.samples(), &[1, 4]);
        assert_eq!(g.samples(), &[2, 5]);
        assert_eq!(b.samples(), &[3, 6]);
    }

    #[test]
    fn gray_of_constant_levels() {
        for (rgb, want) in [([255, 255, 255], 255), ([0, 0, 0], 0), ([100, 100, 100], 100)] {
            let g = to_gray(&RgbRaster::constant(3, 2, rgb).unwrap());
            assert!(g.samples().iter().all(|&v| v == want), "{rgb:?}");
        }
    }

    #[test]
    fn gray_of_hundred_matches_scalar_sum() {
        // 0.2989*100 + 0.5870*100 + 0.1140*100 = 99.99
        let direct: f64 = 29.89 + 58.70 + 11.40;
        assert!((direct - 99.99).abs() < 1e-9);
        assert_eq!(gray_level([100, 100, 100]), direct.round() as u8);
    }

    #[test]
    fn gray_levels_stay_within_one() {
        for v in 0..=255u8 {
            let g = gray_level([v, v, v]);
            assert!((i32::from(g) - i32::from(v)).abs() <= 1, "v={v} g={g}");
        }
        assert_eq!(gray_level([0, 0, 0]), 0);
        assert_eq!(gray_level([255, 255, 255]), 255);
    }

    #[test]
    fn histogram_counts() {
        let g = GrayRaster::new(2, 2, vec![0; 4]).unwrap();
        let h = histogram(&g);
        assert_eq!(h.bins[0], 4);
        assert_eq!(h.total(), 4);

        let g = GrayRaster::new(2, 2, vec![0, 0, 255, 7]).unwrap();
        let h = histogram(&g);
        assert_eq!((h.bins[0], h.bins[7], h.bins[255]), (2, 1, 1));
        assert_eq!(h.bins.iter().filter(|&&c| c > 0).count(), 3);
    }

    #[test]
    fn mismatched_planes_rejected() {
        assert!(RgbRaster::from_planes(2, 2, vec![0; 4], vec![0; 4], vec![0; 3]).is_err());
        assert!(RgbRaster::from_rgb(0, 1, &[]).is_err());
        assert!(Plane::from_rows(&[&[1u8, 2][..], &[3][..]]).is_err());
    }

    #[test]
    fn plane_column_walks_rows() {
        let p = Plane::from_rows(&[&[1u8, 2, 3][..], &[4, 5, 6][..]]).unwrap();
        assert_eq!(p.column(1).collect::<Vec<_>>(), vec![2, 5]);
        assert_eq!(p.get(1, 2), 6);
    }

    #[test]
    fn decode_five_by_ten_png() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        image::RgbImage::from_fn(10, 5, |x, y| image::Rgb([x as u8, y as u8, 7]))
            .save(&path)
            .unwrap();
        let img = decode(&path).unwrap();
        assert_eq!((img.width(), img.height()), (10, 5));
        assert_eq!(img.red().len(), 50);
        assert_eq!(img.pixel(4, 9), [9, 4, 7]);
    }

    #[test]
    fn decode_single_black_pixel() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("px.png");
        image::RgbImage::from_pixel(1, 1, image::Rgb([0, 0, 0]))
            .save(&path)
            .unwrap();
        let img = decode(&path).unwrap();
        assert_eq!((img.red(), img.green(), img.blue()), (&[0u8][..], &[0u8][..], &[0u8][..]));
    }

    #[test]
    fn decode_grayscale_replicates_channel() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.png");
        image::GrayImage::from_fn(3, 2, |x, y| image::Luma([(x * 10 + y) as u8]))
            .save(&path)
            .unwrap();
        let img = decode(&path).unwrap();
        assert_eq!(img.red(), img.green());
        assert_eq!(img.green(), img.blue());
        assert_eq!(img.red(), &[0, 10, 20, 1, 11, 21]);
    }

    #[test]
    fn decode_drops_alpha() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.png");
        image::RgbaImage::from_pixel(2, 2, image::Rgba([50, 60, 70, 0]))
            .save(&path)
            .unwrap();
        let img = decode(&path).unwrap();
        assert_eq!(img.pixel(1, 1), [50, 60, 70]);
    }

    #[test]
    fn decode_truncated_jpeg_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jpg");
        let full = dir.path().join("full.jpg");
        image::RgbImage::from_fn(32, 32, |x, y| image::Rgb([x as u8 * 8, y as u8 * 8, 0]))
            .save(&full)
            .unwrap();
        let bytes = std::fs::read(&full).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 3]).unwrap();
        match decode(&path) {
            Err(Error::CorruptImage { path: p, .. }) => assert_eq!(p, path),
            other => panic!("expected CorruptImage, got {other:?}"),
        }
    }

    #[test]
    fn decode_errors_carry_path() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.png");
        assert!(matches!(decode(&missing), Err(Error::FileNotFound { path }) if path == missing));

        let text = dir.path().join("notes.txt");
        std::fs::write(&text, b"just some text, not an image").unwrap();
        assert!(matches!(decode(&text), Err(Error::UnsupportedFormat { path }) if path == text));

        let fake = dir.path().join("fake.png");
        std::fs::write(&fake, b"just some text, not an image").unwrap();
        assert!(matches!(decode(&fake), Err(Error::CorruptImage { path, .. }) if path == fake));
    }
}
