//! Software rasterizer for stroke prefixes.
//!
//! Outlined strokes cover every pixel whose center lies within half the
//! stroke width (at least half a pixel) of the flattened polyline, which
//! gives round caps and joins. Filled strokes are closed with their chord
//! and filled by even-odd scanlines through pixel centers. Paint is opaque
//! and later strokes overwrite earlier ones. Anti-aliasing is off unless
//! requested, in which case coverage is estimated from a 4×4 grid of
//! samples per pixel.

use std::collections::HashMap;
use std::path::Path;

use crate::raster::{RasterError, RasterImage};
use crate::stroke::{distance_to_segment, Color, Point, Stroke};

/// Flattening tolerance used for drawing, in pixels.
pub const FLATTEN_TOLERANCE: f64 = 0.25;

const SUBSAMPLES: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canvas {
    image: RasterImage,
    background: Color,
    antialias: bool,
}

impl Canvas {
    /// White canvas, no anti-aliasing.
    pub fn new(width: u32, height: u32) -> Canvas {
        Canvas::with_background(width, height, Color::WHITE)
    }

    pub fn with_background(width: u32, height: u32, background: Color) -> Canvas {
        Canvas {
            image: RasterImage::filled(width, height, background),
            background,
            antialias: false,
        }
    }

    pub fn antialiased(mut self, on: bool) -> Canvas {
        self.antialias = on;
        self
    }

    pub fn width(&self) -> u32 {
        self.image.width()
    }

    pub fn height(&self) -> u32 {
        self.image.height()
    }

    pub fn background(&self) -> Color {
        self.background
    }

    pub fn get(&self, x: u32, y: u32) -> Color {
        self.image.get(x, y)
    }

    pub fn pixels(&self) -> &[Color] {
        self.image.pixels()
    }

    pub fn image(&self) -> &RasterImage {
        &self.image
    }

    pub fn into_image(self) -> RasterImage {
        self.image
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<(), RasterError> {
        self.image.save_png(path)
    }

    /// Paints one stroke on top of the current contents.
    pub fn draw_stroke(&mut self, stroke: &Stroke) {
        let polyline = stroke.flatten(FLATTEN_TOLERANCE);
        match (stroke.filled(), self.antialias) {
            (false, false) => self.outline_hard(&polyline, half_width(stroke), stroke.color()),
            (true, false) => self.fill_hard(&polyline, stroke.color()),
            (false, true) => {
                let coverage =
                    outline_coverage(&polyline, half_width(stroke), self.width(), self.height());
                self.blend(coverage, stroke.color());
            }
            (true, true) => {
                let coverage = fill_coverage(&polyline, self.width(), self.height());
                self.blend(coverage, stroke.color());
            }
        }
    }

    fn outline_hard(&mut self, polyline: &[Point], r: f64, color: Color) {
        let (w, h) = (self.width(), self.height());
        for_each_segment(polyline, |a, b| {
            let Some((x0, y0, x1, y1)) = pixel_box(a, b, r, w, h) else {
                return;
            };
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let c = Point::new(f64::from(x) + 0.5, f64::from(y) + 0.5);
                    if distance_to_segment(c, a, b) <= r {
                        self.image.set(x, y, color);
                    }
                }
            }
        });
    }

    fn fill_hard(&mut self, polyline: &[Point], color: Color) {
        let (w, h) = (self.width(), self.height());
        let Some((ymin, ymax)) = row_range(polyline, h) else {
            return;
        };
        let mut xs = Vec::new();
        for y in ymin..=ymax {
            crossings(polyline, f64::from(y) + 0.5, &mut xs);
            for pair in xs.chunks_exact(2) {
                // Pixel centers in [left, right).
                let first = (pair[0] - 0.5).ceil().max(0.0);
                let last = (pair[1] - 0.5).ceil() - 1.0;
                if last < first {
                    continue;
                }
                let last = last.min(f64::from(w) - 1.0);
                let mut x = first;
                while x <= last {
                    self.image.set(x as u32, y, color);
                    x += 1.0;
                }
            }
        }
    }

    fn blend(&mut self, coverage: HashMap<(u32, u32), u16>, color: Color) {
        let total = (SUBSAMPLES * SUBSAMPLES) as f64;
        let mut cells: Vec<_> = coverage.into_iter().collect();
        cells.sort_unstable_by_key(|&(k, _)| k);
        for ((x, y), mask) in cells {
            let a = f64::from(mask.count_ones()) / total;
            if a == 0.0 {
                continue;
            }
            let old = self.image.get(x, y);
            let mix = |o: u8, n: u8| (f64::from(o) * (1.0 - a) + f64::from(n) * a).round() as u8;
            self.image.set(
                x,
                y,
                Color::rgb(
                    mix(old.r, color.r),
                    mix(old.g, color.g),
                    mix(old.b, color.b),
                ),
            );
        }
    }
}

fn half_width(stroke: &Stroke) -> f64 {
    (stroke.width() / 2.0).max(0.5)
}

fn for_each_segment(polyline: &[Point], mut f: impl FnMut(Point, Point)) {
    if polyline.len() == 1 {
        f(polyline[0], polyline[0]);
    }
    for w in polyline.windows(2) {
        f(w[0], w[1]);
    }
}

/// Pixels whose centers may lie within `r` of segment `ab`, clipped to the
/// canvas.
fn pixel_box(a: Point, b: Point, r: f64, w: u32, h: u32) -> Option<(u32, u32, u32, u32)> {
    let lo_x = (a.x.min(b.x) - r - 0.5).floor().max(0.0);
    let lo_y = (a.y.min(b.y) - r - 0.5).floor().max(0.0);
    let hi_x = (a.x.max(b.x) + r - 0.5).ceil().min(f64::from(w) - 1.0);
    let hi_y = (a.y.max(b.y) + r - 0.5).ceil().min(f64::from(h) - 1.0);
    (lo_x <= hi_x && lo_y <= hi_y).then_some((lo_x as u32, lo_y as u32, hi_x as u32, hi_y as u32))
}

fn row_range(polyline: &[Point], h: u32) -> Option<(u32, u32)> {
    if polyline.len() < 3 {
        return None;
    }
    let ymin = polyline.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let ymax = polyline
        .iter()
        .map(|p| p.y)
        .fold(f64::NEG_INFINITY, f64::max);
    let lo = (ymin - 0.5).floor().max(0.0);
    let hi = (ymax - 0.5).ceil().min(f64::from(h) - 1.0);
    (lo <= hi).then_some((lo as u32, hi as u32))
}

/// Sorted x positions where the closed polygon crosses the horizontal line
/// `y`. An edge counts when its endpoints lie on opposite sides, with the
/// upper endpoint included.
fn crossings(polygon: &[Point], y: f64, out: &mut Vec<f64>) {
    out.clear();
    let n = polygon.len();
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[(i + 1) % n]);
        if (a.y > y) != (b.y > y) {
            out.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
        }
    }
    out.sort_by(f64::total_cmp);
}

fn sample_offset(i: usize) -> f64 {
    (i as f64 + 0.5) / SUBSAMPLES as f64
}

fn outline_coverage(polyline: &[Point], r: f64, w: u32, h: u32) -> HashMap<(u32, u32), u16> {
    let mut coverage: HashMap<(u32, u32), u16> = HashMap::new();
    for_each_segment(polyline, |a, b| {
        let Some((x0, y0, x1, y1)) = pixel_box(a, b, r + 0.5, w, h) else {
            return;
        };
        for y in y0..=y1 {
            for x in x0..=x1 {
                let mut mask = 0u16;
                for sy in 0..SUBSAMPLES {
                    for sx in 0..SUBSAMPLES {
                        let p = Point::new(
                            f64::from(x) + sample_offset(sx),
                            f64::from(y) + sample_offset(sy),
                        );
                        if distance_to_segment(p, a, b) <= r {
                            mask |= 1 << (sy * SUBSAMPLES + sx);
                        }
                    }
                }
                if mask != 0 {
                    *coverage.entry((x, y)).or_default() |= mask;
                }
            }
        }
    });
    coverage
}

fn fill_coverage(polygon: &[Point], w: u32, h: u32) -> HashMap<(u32, u32), u16> {
    let mut coverage: HashMap<(u32, u32), u16> = HashMap::new();
    let Some((ymin, ymax)) = row_range(polygon, h) else {
        return coverage;
    };
    let mut xs = Vec::new();
    for y in ymin.saturating_sub(1)..=ymax {
        for sy in 0..SUBSAMPLES {
            crossings(polygon, f64::from(y) + sample_offset(sy), &mut xs);
            for pair in xs.chunks_exact(2) {
                let lo = pair[0].floor().max(0.0) as u32;
                let hi = (pair[1].ceil().min(f64::from(w))) as u32;
                for x in lo..hi {
                    for sx in 0..SUBSAMPLES {
                        let px = f64::from(x) + sample_offset(sx);
                        if px >= pair[0] && px < pair[1] {
                            *coverage.entry((x, y)).or_default() |= 1 << (sy * SUBSAMPLES + sx);
                        }
                    }
                }
            }
        }
    }
    coverage
}

/// Returns a copy of `canvas` with `stroke` drawn on it.
pub fn draw_stroke(canvas: &Canvas, stroke: &Stroke) -> Canvas {
    let mut out = canvas.clone();
    out.draw_stroke(stroke);
    out
}

/// Draws `strokes` in order onto a fresh white canvas.
pub fn render_all<'a>(
    width: u32,
    height: u32,
    strokes: impl IntoIterator<Item = &'a Stroke>,
    antialias: bool,
) -> Canvas {
    let mut canvas = Canvas::new(width, height).antialiased(antialias);
    for s in strokes {
        canvas.draw_stroke(s);
    }
    canvas
}

/// Stroke counts after which a frame is taken: every `every` strokes plus
/// the final count when it is not already included. An empty sequence gives
/// the single frame `0`.
///
/// Panics if `every` is zero.
pub fn frame_points(total: usize, every: usize) -> Vec<usize> {
    assert!(every >= 1, "frame interval must be at least 1");
    let mut points: Vec<usize> = (1..=total / every).map(|i| i * every).collect();
    if points.last() != Some(&total) {
        points.push(total);
    }
    points
}

/// Incremental frame rendering. `on_frame` receives the number of strokes
/// drawn so far and the canvas at that point, in increasing order.
pub fn render_frames_with<E>(
    width: u32,
    height: u32,
    strokes: &[&Stroke],
    every: usize,
    antialias: bool,
    mut on_frame: impl FnMut(usize, &Canvas) -> Result<(), E>,
) -> Result<(), E> {
    let mut canvas = Canvas::new(width, height).antialiased(antialias);
    let mut drawn = 0;
    for k in frame_points(strokes.len(), every) {
        for s in &strokes[drawn..k] {
            canvas.draw_stroke(s);
        }
        drawn = k;
        on_frame(k, &canvas)?;
    }
    Ok(())
}

/// Collects the frames of [`render_frames_with`].
pub fn render_frames(
    width: u32,
    height: u32,
    strokes: &[&Stroke],
    every: usize,
    antialias: bool,
) -> Vec<(usize, Canvas)> {
    let mut frames = Vec::new();
    render_frames_with::<std::convert::Infallible>(
        width,
        height,
        strokes,
        every,
        antialias,
        |k, c| {
            frames.push((k, c.clone()));
            Ok(())
        },
    )
    .unwrap_or_else(|never| match never {});
    frames
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stroke::{Geometry, StrokeId};

    fn line(a: (f64, f64), b: (f64, f64), width: f64) -> Stroke {
        Stroke::line(
            StrokeId(0),
            Point::new(a.0, a.1),
            Point::new(b.0, b.1),
            Color::BLACK,
            width,
        )
        .unwrap()
    }

    #[test]
    fn horizontal_line() {
        let mut c = Canvas::new(100, 100);
        c.draw_stroke(&line((10., 10.), (90., 10.), 2.0));
        assert_eq!(c.get(50, 10), Color::BLACK);
        assert_eq!(c.get(50, 9), Color::BLACK);
        assert_eq!(c.get(50, 12), Color::WHITE);
        assert_eq!(c.get(50, 50), Color::WHITE);
        // Round cap reaches one unit past the end.
        assert_eq!(c.get(90, 10), Color::BLACK);
        assert_eq!(c.get(92, 10), Color::WHITE);
    }

    #[test]
    fn filled_curve_interior() {
        let square = Stroke::new(
            StrokeId(0),
            Geometry::Cubic([
                Point::new(10., 10.),
                Point::new(90., 10.),
                Point::new(90., 90.),
                Point::new(10., 90.),
            ]),
            Color::BLACK,
            1.0,
        )
        .unwrap()
        .with_filled(true);
        let mut c = Canvas::new(100, 100);
        c.draw_stroke(&square);
        assert_eq!(c.get(50, 50), Color::BLACK);
        assert_eq!(c.get(5, 50), Color::WHITE);
        assert_eq!(c.get(95, 50), Color::WHITE);
    }

    #[test]
    fn drawing_twice_is_idempotent() {
        let s = line((3., 7.), (40., 33.), 3.0);
        let once = draw_stroke(&Canvas::new(50, 50), &s);
        assert_eq!(draw_stroke(&once, &s), once);
    }

    #[test]
    fn frame_schedule() {
        assert_eq!(frame_points(0, 5), vec![0]);
        assert_eq!(frame_points(10, 5), vec![5, 10]);
        assert_eq!(frame_points(11, 5), vec![5, 10, 11]);
        assert_eq!(frame_points(3, 25), vec![3]);
    }

    #[test]
    fn empty_sequence_gives_blank_frame() {
        let frames = render_frames(8, 8, &[], 5, false);
        assert_eq!(frames.len(), 1);
        assert!(frames[0].1.pixels().iter().all(|&p| p == Color::WHITE));
    }

    #[test]
    fn antialiased_edges_are_partial() {
        let mut c = Canvas::new(20, 20).antialiased(true);
        c.draw_stroke(&line((2., 10.3), (18., 10.3), 1.0));
        let edge = c.get(10, 10);
        assert!(edge.r < 255);
        assert!(c.pixels().iter().any(|p| p.r > 0 && p.r < 255));
    }

    #[test]
    fn off_canvas_strokes_are_clipped() {
        let mut c = Canvas::new(10, 10);
        c.draw_stroke(&line((-0.5, -0.5), (10.9, 10.9), 1.0));
        assert_eq!(c.get(0, 0), Color::BLACK);
        assert_eq!(c.get(9, 9), Color::BLACK);
    }
}
