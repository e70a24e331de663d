//! Raster to stroke conversion.
//!
//! The stages are: optional color reduction ([`posterize`]), per-region
//! boundary tracing ([`trace_contours`]), polyline simplification
//! ([`simplify`]) used for corner detection, and piecewise cubic fitting
//! ([`fit_curves`]).

mod fit;
mod simplify;
mod trace;

use rayon::prelude::*;
use thiserror::Error;

use crate::raster::{GrayImage, RasterImage};
use crate::stroke::{Color, Point, Stream, Stroke, StrokeError, StrokeId, StrokeSet};

pub use fit::fit_curves;
pub use simplify::simplify;
pub use trace::{background_color, trace_contours, MAX_TRACE_COLORS, MIN_REGION_PIXELS};

/// Grayscale threshold applied to sketches before tracing.
pub const SKETCH_BINARIZE_THRESHOLD: u8 = 128;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VectorizeError {
    #[error("TooManyColors: image has {0} distinct colors, at most 64 can be traced")]
    TooManyColors(usize),
    #[error("DegenerateContour: contour points are all coincident")]
    DegenerateContour,
    #[error("invalid fit parameters: {0}")]
    InvalidParams(&'static str),
    #[error(transparent)]
    Stroke(#[from] StrokeError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitParams {
    /// Largest allowed distance from a contour vertex to its fitted curve.
    pub max_error: f64,
    /// Turning angle, in degrees, above which a vertex splits the fit.
    pub corner_angle_deg: f64,
    pub simplify_epsilon: f64,
    /// Color levels per channel for the paint stream.
    pub posterize_levels: u32,
    /// Width given to fitted strokes.
    pub stroke_width: f64,
}

impl Default for FitParams {
    fn default() -> Self {
        FitParams {
            max_error: 1.0,
            corner_angle_deg: 60.0,
            simplify_epsilon: 0.5,
            posterize_levels: 8,
            stroke_width: 1.0,
        }
    }
}

impl FitParams {
    pub fn validate(&self) -> Result<(), VectorizeError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.max_error) {
            return Err(VectorizeError::InvalidParams("max_error must be > 0"));
        }
        if !(positive(self.corner_angle_deg) && self.corner_angle_deg <= 180.0) {
            return Err(VectorizeError::InvalidParams(
                "corner angle must be in (0, 180]",
            ));
        }
        if !positive(self.simplify_epsilon) {
            return Err(VectorizeError::InvalidParams(
                "simplify epsilon must be > 0",
            ));
        }
        if !(2..=64).contains(&self.posterize_levels) {
            return Err(VectorizeError::InvalidParams(
                "posterize levels must be in [2, 64]",
            ));
        }
        if !positive(self.stroke_width) {
            return Err(VectorizeError::InvalidParams("stroke width must be > 0"));
        }
        Ok(())
    }
}

/// Boundary polyline of one traced region.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    points: Vec<Point>,
    color: Color,
    closed: bool,
}

impl Contour {
    /// Drops consecutive duplicates (including the wrap-around duplicate of a
    /// closed contour). Fails when fewer than two distinct points remain.
    pub fn new(points: Vec<Point>, color: Color, closed: bool) -> Result<Contour, VectorizeError> {
        let mut pts: Vec<Point> = Vec::with_capacity(points.len());
        for p in points {
            if !p.is_finite() {
                return Err(StrokeError::NonFinite(StrokeId(0)).into());
            }
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        if closed {
            while pts.len() > 1 && pts.first() == pts.last() {
                pts.pop();
            }
        }
        if pts.len() < 2 {
            return Err(VectorizeError::DegenerateContour);
        }
        Ok(Contour {
            points: pts,
            color,
            closed,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn color(&self) -> Color {
        self.color
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Vertices as an open polyline; closed contours repeat their first point.
    pub fn polyline(&self) -> Vec<Point> {
        let mut pts = self.points.clone();
        if self.closed {
            pts.push(self.points[0]);
        }
        pts
    }
}

/// Quantizes each channel to `levels` uniform bins, mapping every value to
/// its bin center `round((bin + 0.5) * 255 / levels)`.
///
/// # Panics
/// When `levels` is outside `[2, 256]`.
pub fn posterize(image: &RasterImage, levels: u32) -> RasterImage {
    assert!(
        (2..=256).contains(&levels),
        "posterize levels must be in [2, 256]"
    );
    let lut: Vec<u8> = (0..256u32)
        .map(|v| {
            let bin = v * levels / 256;
            ((f64::from(bin) + 0.5) * 255.0 / f64::from(levels)).round() as u8
        })
        .collect();
    let q = |v: u8| lut[v as usize];
    let pixels = image
        .pixels()
        .iter()
        .map(|c| Color::rgb(q(c.r), q(c.g), q(c.b)))
        .collect();
    RasterImage::new(image.width(), image.height(), pixels).expect("same dimensions")
}

/// Keeps the `max_colors` most frequent colors (ties to the smaller RGB
/// value) and moves every other pixel to its nearest kept color in RGB
/// space. Images already within the limit come back unchanged.
pub fn limit_palette(image: &RasterImage, max_colors: usize) -> RasterImage {
    assert!(max_colors >= 1, "palette needs at least one color");
    let mut counts: std::collections::HashMap<Color, usize> = std::collections::HashMap::new();
    for &c in image.pixels() {
        *counts.entry(c).or_default() += 1;
    }
    if counts.len() <= max_colors {
        return image.clone();
    }
    let mut ranked: Vec<(Color, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.packed().cmp(&b.0.packed())));
    let mut palette: Vec<Color> = ranked[..max_colors].iter().map(|(c, _)| *c).collect();
    palette.sort_by_key(|c| c.packed());
    let dist = |a: Color, b: Color| {
        let d = |x: u8, y: u8| (i32::from(x) - i32::from(y)).pow(2);
        d(a.r, b.r) + d(a.g, b.g) + d(a.b, b.b)
    };
    let mut mapping: std::collections::HashMap<Color, Color> = std::collections::HashMap::new();
    for (c, _) in &ranked {
        let nearest = *palette
            .iter()
            .min_by_key(|p| dist(*c, **p))
            .expect("non-empty palette");
        mapping.insert(*c, nearest);
    }
    let pixels = image.pixels().iter().map(|c| mapping[c]).collect();
    RasterImage::new(image.width(), image.height(), pixels).expect("same dimensions")
}

/// Fits every contour and numbers the resulting strokes from `first_id` in
/// contour order.
pub fn strokes_from_contours(
    contours: &[Contour],
    params: &FitParams,
    stream: Stream,
    first_id: u32,
) -> Result<Vec<Stroke>, VectorizeError> {
    let fitted: Vec<Vec<Stroke>> = contours
        .par_iter()
        .map(|c| fit_curves(c, params))
        .collect::<Result<_, _>>()?;
    Ok((first_id..)
        .zip(fitted.into_iter().flatten())
        .map(|(id, stroke)| stroke.with_id(StrokeId(id)).with_stream(stream))
        .collect())
}

/// Binarizes a line drawing and converts its dark regions into strokes.
pub fn vectorize_sketch(
    sketch: &GrayImage,
    params: &FitParams,
) -> Result<StrokeSet, VectorizeError> {
    params.validate()?;
    let binary = sketch.binarize(SKETCH_BINARIZE_THRESHOLD);
    let contours = trace_contours(&binary)?;
    let strokes = strokes_from_contours(&contours, params, Stream::Sketch, 0)?
        .into_iter()
        .map(|s| {
            let gray = s.color().to_grayscale();
            s.with_color(gray)
        })
        .collect();
    Ok(StrokeSet::new(strokes, sketch.width(), sketch.height())?)
}

/// Posterizes an RGB image and converts its color regions into strokes.
pub fn vectorize_paint(
    image: &RasterImage,
    params: &FitParams,
    first_id: u32,
) -> Result<StrokeSet, VectorizeError> {
    params.validate()?;
    let reduced = limit_palette(&posterize(image, params.posterize_levels), MAX_TRACE_COLORS);
    let contours = trace_contours(&reduced)?;
    let strokes = strokes_from_contours(&contours, params, Stream::Paint, first_id)?;
    Ok(StrokeSet::new(strokes, image.width(), image.height())?)
}
