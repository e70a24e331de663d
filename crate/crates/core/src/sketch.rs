//! Line-drawing extraction from an RGB raster.
//!
//! A difference of Gaussians on the luminance channel stands in for a learned
//! line-drawing generator. Any externally produced sketch can bypass this
//! module entirely.

use rayon::prelude::*;
use thiserror::Error;

use crate::raster::{GrayImage, RasterImage};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SketchError {
    #[error("EmptyImage: input raster has no pixels")]
    EmptyImage,
    #[error("invalid edge parameters: {0}")]
    InvalidParams(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeParams {
    /// Inner Gaussian standard deviation, in pixels.
    pub sigma: f64,
    /// Ratio of the outer to the inner standard deviation.
    pub k: f64,
    /// Fraction of the strongest response above which a pixel is a line.
    pub threshold: f64,
}

impl Default for EdgeParams {
    fn default() -> Self {
        EdgeParams {
            sigma: 1.0,
            k: 1.6,
            threshold: 0.1,
        }
    }
}

impl EdgeParams {
    pub fn validate(&self) -> Result<(), SketchError> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(SketchError::InvalidParams("sigma must be > 0"));
        }
        if !(self.k.is_finite() && self.k > 1.0) {
            return Err(SketchError::InvalidParams("k must be > 1"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(SketchError::InvalidParams("threshold must be in (0, 1)"));
        }
        Ok(())
    }
}

/// Normalized sampled Gaussian with radius `ceil(3·sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|w| *w /= sum);
    kernel
}

/// Luminance in `[0, 1]`, row-major.
pub fn luminance(image: &RasterImage) -> Vec<f64> {
    image
        .pixels()
        .iter()
        .map(|c| c.luminance() / 255.0)
        .collect()
}

/// Separable convolution with clamp-to-edge borders.
fn blur(values: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let radius = (kernel.len() / 2) as i64;
    let clamp = |v: i64, n: usize| v.clamp(0, n as i64 - 1) as usize;

    let mut horizontal = vec![0.0; values.len()];
    horizontal
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(y, row)| {
            let src = &values[y * width..(y + 1) * width];
            for (x, out) in row.iter_mut().enumerate() {
                *out = kernel
                    .iter()
                    .enumerate()
                    .map(|(i, w)| w * src[clamp(x as i64 + i as i64 - radius, width)])
                    .sum();
            }
        });

    let mut vertical = vec![0.0; values.len()];
    vertical
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(y, row)| {
            for (x, out) in row.iter_mut().enumerate() {
                *out = kernel
                    .iter()
                    .enumerate()
                    .map(|(i, w)| {
                        w * horizontal[clamp(y as i64 + i as i64 - radius, height) * width + x]
                    })
                    .sum();
            }
        });
    vertical
}

/// Peak responses at or below this are rounding noise from a flat image.
const FLAT_RESPONSE: f64 = 1e-9;

/// Absolute difference-of-Gaussians response scaled so the strongest pixel
/// is 1. A constant image yields all zeros.
pub fn edge_response(image: &RasterImage, params: &EdgeParams) -> Result<Vec<f64>, SketchError> {
    if image.is_empty() {
        return Err(SketchError::EmptyImage);
    }
    params.validate()?;
    let (w, h) = (image.width() as usize, image.height() as usize);
    let lum = luminance(image);
    let narrow = blur(&lum, w, h, &gaussian_kernel(params.sigma));
    let wide = blur(&lum, w, h, &gaussian_kernel(params.k * params.sigma));
    let mut response: Vec<f64> = narrow
        .iter()
        .zip(&wide)
        .map(|(a, b)| (a - b).abs())
        .collect();
    let max = response.iter().copied().fold(0.0, f64::max);
    if max > FLAT_RESPONSE {
        response.iter_mut().for_each(|r| *r /= max);
    } else {
        response.iter_mut().for_each(|r| *r = 0.0);
    }
    Ok(response)
}

/// Dark-on-white line drawing: 0 where the normalized response exceeds
/// `params.threshold`, 255 elsewhere.
pub fn extract_sketch(image: &RasterImage, params: &EdgeParams) -> Result<GrayImage, SketchError> {
    let response = edge_response(image, params)?;
    let pixels = response
        .iter()
        .map(|&r| if r > params.threshold { 0 } else { 255 })
        .collect();
    Ok(GrayImage::new(image.width(), image.height(), pixels).expect("dimensions preserved"))
}
