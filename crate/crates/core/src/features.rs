//! Per-image color statistics.
//!
//! Median and standard deviation are *composite*: the statistic is taken
//! down each column first, then once more across the resulting per-column
//! values. This is not the same as the global median or deviation of all
//! pixels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{histogram, split_channels, to_gray, Plane, RgbRaster};

/// The stored description of one indexed image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub name: String,
    pub width: u32,
    pub height: u32,
    pub threshold: u64,
    pub mean_r: f64,
    pub mean_g: f64,
    pub mean_b: f64,
    pub median_r: f64,
    pub median_g: f64,
    pub median_b: f64,
    pub std_r: f64,
    pub std_g: f64,
    pub std_b: f64,
}

/// Arithmetic mean over every sample of the plane.
pub fn channel_mean<T: Copy + Into<f64>>(plane: &Plane<T>) -> Result<f64> {
    let samples = plane.samples();
    if samples.is_empty() {
        return Err(Error::EmptyPlane);
    }
    let sum: f64 = samples.iter().map(|&v| v.into()).sum();
    Ok(sum / samples.len() as f64)
}

/// Median of the per-column medians.
pub fn channel_median_composite<T: Copy + Into<f64>>(plane: &Plane<T>) -> Result<f64> {
    if plane.samples().is_empty() {
        return Err(Error::EmptyPlane);
    }
    let mut column = Vec::with_capacity(plane.height());
    let mut medians: Vec<f64> = (0..plane.width())
        .map(|c| {
            column.clear();
            column.extend(plane.column(c).map(Into::into));
            median_in_place(&mut column)
        })
        .collect();
    Ok(median_in_place(&mut medians))
}

/// Sample standard deviation (divisor `n - 1`) of the per-column sample
/// standard deviations.
pub fn channel_std_composite<T: Copy + Into<f64>>(plane: &Plane<T>) -> Result<f64> {
    if plane.samples().is_empty() {
        return Err(Error::EmptyPlane);
    }
    let mut column = Vec::with_capacity(plane.height());
    let stds: Vec<f64> = (0..plane.width())
        .map(|c| {
            column.clear();
            column.extend(plane.column(c).map(Into::into));
            sample_std(&column)
        })
        .collect();
    Ok(sample_std(&stds))
}

/// Sum of all bins of the grayscale intensity histogram.
///
/// The bins partition the pixels, so this always equals the pixel count.
pub fn threshold(img: &RgbRaster) -> u64 {
    histogram(&to_gray(img)).total()
}

pub fn extract_features(img: &RgbRaster, name: &str) -> Result<FeatureVector> {
    if name.is_empty() {
        return Err(Error::InvalidName {
            name: name.to_string(),
            reason: "name is empty",
        });
    }
    let (r, g, b) = split_channels(img);
    Ok(FeatureVector {
        name: name.to_string(),
        width: img.width() as u32,
        height: img.height() as u32,
        threshold: threshold(img),
        mean_r: channel_mean(&r)?,
        mean_g: channel_mean(&g)?,
        mean_b: channel_mean(&b)?,
        median_r: channel_median_composite(&r)?,
        median_g: channel_median_composite(&g)?,
        median_b: channel_median_composite(&b)?,
        std_r: channel_std_composite(&r)?,
        std_g: channel_std_composite(&g)?,
        std_b: channel_std_composite(&b)?,
    })
}

// Even lengths average the two central order statistics.
fn median_in_place(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1) as f64).sqrt()
}
