//! In-memory raster images and PNG input/output.

use std::path::Path;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::ImageEncoder;
use thiserror::Error;

use crate::stroke::Color;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("pixel buffer has {got} entries, expected {expected}")]
    BufferSize { expected: usize, got: usize },
    #[error("image i/o: {0}")]
    Image(#[from] image::ImageError),
}

/// Row-major 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<Color>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, pixels: Vec<Color>) -> Result<Self, RasterError> {
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(RasterError::BufferSize {
                expected,
                got: pixels.len(),
            });
        }
        Ok(RasterImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, color: Color) -> Self {
        RasterImage {
            width,
            height,
            pixels: vec![color; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> Color) -> Self {
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        RasterImage {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[Color] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> Color {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, color: Color) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = color;
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<Self, RasterError> {
        let img = image::open(path)?.to_rgb8();
        let (width, height) = img.dimensions();
        let pixels = img.pixels().map(|p| Color::rgb(p[0], p[1], p[2])).collect();
        Ok(RasterImage {
            width,
            height,
            pixels,
        })
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<(), RasterError> {
        let raw: Vec<u8> = self.pixels.iter().flat_map(|c| [c.r, c.g, c.b]).collect();
        write_png(
            path.as_ref(),
            &raw,
            self.width,
            self.height,
            image::ExtendedColorType::Rgb8,
        )
    }
}

/// Fast-compression PNG; frame sequences are written by the hundred.
fn write_png(
    path: &Path,
    raw: &[u8],
    width: u32,
    height: u32,
    color: image::ExtendedColorType,
) -> Result<(), RasterError> {
    let file =
        std::io::BufWriter::new(std::fs::File::create(path).map_err(image::ImageError::IoError)?);
    let encoder = PngEncoder::new_with_quality(file, CompressionType::Fast, FilterType::Adaptive);
    encoder.write_image(raw, width, height, color)?;
    Ok(())
}

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, RasterError> {
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(RasterError::BufferSize {
                expected,
                got: pixels.len(),
            });
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// Two-level RGB image: black where the value is below `threshold`,
    /// white elsewhere.
    pub fn binarize(&self, threshold: u8) -> RasterImage {
        RasterImage {
            width: self.width,
            height: self.height,
            pixels: self
                .pixels
                .iter()
                .map(|&v| {
                    if v < threshold {
                        Color::BLACK
                    } else {
                        Color::WHITE
                    }
                })
                .collect(),
        }
    }

    /// Reads a PNG and reduces it to luma.
    pub fn load_png(path: impl AsRef<Path>) -> Result<Self, RasterError> {
        let rgb = RasterImage::load_png(path)?;
        Ok(GrayImage::from(&rgb))
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<(), RasterError> {
        write_png(
            path.as_ref(),
            &self.pixels,
            self.width,
            self.height,
            image::ExtendedColorType::L8,
        )
    }
}

impl From<&RasterImage> for GrayImage {
    fn from(rgb: &RasterImage) -> Self {
        GrayImage {
            width: rgb.width,
            height: rgb.height,
            pixels: rgb
                .pixels
                .iter()
                .map(|c| c.luminance().round() as u8)
                .collect(),
        }
    }
}
