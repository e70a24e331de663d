#![allow(dead_code)]

use rand::Rng;
use strokeflow::stroke::ArcParams;
use strokeflow::{Color, Geometry, Point, Stroke, StrokeId, StrokeSet};

pub fn point_in<R: Rng>(rng: &mut R, w: f64, h: f64) -> Point {
    Point::new(rng.gen_range(0.0..w), rng.gen_range(0.0..h))
}

/// A valid stroke of a random kind with all control points inside the
/// canvas. Arcs are kept small enough to stay within the canvas bounds.
pub fn random_stroke<R: Rng>(rng: &mut R, id: u32, w: f64, h: f64) -> Stroke {
    let color = Color::rgb(rng.gen(), rng.gen(), rng.gen());
    let width = rng.gen_range(0.5..4.0);
    let geometry = loop {
        let g = match rng.gen_range(0..5) {
            0 => Geometry::Line([point_in(rng, w, h), point_in(rng, w, h)]),
            1 => Geometry::Quadratic([
                point_in(rng, w, h),
                point_in(rng, w, h),
                point_in(rng, w, h),
            ]),
            2 => Geometry::Cubic([
                point_in(rng, w, h),
                point_in(rng, w, h),
                point_in(rng, w, h),
                point_in(rng, w, h),
            ]),
            3 => {
                let c = Point::new(
                    rng.gen_range(0.3 * w..0.7 * w),
                    rng.gen_range(0.3 * h..0.7 * h),
                );
                let r = rng.gen_range(1.0..0.25 * w.min(h));
                let a0: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let sweep: f64 = rng.gen_range(0.2..6.0) * if rng.gen() { 1.0 } else { -1.0 };
                let at = |a: f64| Point::new(c.x + r * a.cos(), c.y + r * a.sin());
                Geometry::CircularArc([at(a0), at(a0 + sweep / 2.0), at(a0 + sweep)])
            }
            _ => {
                let c = Point::new(
                    rng.gen_range(0.3 * w..0.7 * w),
                    rng.gen_range(0.3 * h..0.7 * h),
                );
                let rx = rng.gen_range(1.0..0.25 * w.min(h));
                let ry = rng.gen_range(1.0..0.25 * w.min(h));
                let phi: f64 = rng.gen_range(0.0..180.0);
                let (s, co) = phi.to_radians().sin_cos();
                let at = |t: f64| {
                    let (x, y) = (rx * t.cos(), ry * t.sin());
                    Point::new(c.x + co * x - s * y, c.y + s * x + co * y)
                };
                let t0: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let t1 = t0 + rng.gen_range(0.3..5.5);
                Geometry::EllipticalArc {
                    start: at(t0),
                    end: at(t1),
                    arc: ArcParams {
                        rx,
                        ry,
                        x_axis_rotation: phi,
                        large_arc: t1 - t0 > std::f64::consts::PI,
                        sweep: true,
                    },
                }
            }
        };
        let degenerate = match &g {
            Geometry::Line([a, b]) => a == b,
            Geometry::EllipticalArc { start, end, .. } => start.distance(*end) < 1e-6,
            _ => false,
        };
        if !degenerate {
            break g;
        }
    };
    Stroke::new(StrokeId(id), geometry, color, width).expect("generated stroke is valid")
}

pub fn random_set<R: Rng>(rng: &mut R, n: usize, w: u32, h: u32) -> StrokeSet {
    let strokes = (0..n as u32)
        .map(|i| random_stroke(rng, i, f64::from(w), f64::from(h)))
        .collect();
    StrokeSet::new(strokes, w, h).expect("generated set is valid")
}

/// Lines anchored at random points.
pub fn anchored_lines<R: Rng>(rng: &mut R, n: usize, w: u32, h: u32) -> StrokeSet {
    let strokes = (0..n as u32)
        .map(|i| {
            let a = point_in(rng, f64::from(w), f64::from(h));
            let b = Point::new((a.x + 3.0).min(f64::from(w)), a.y);
            let b = if a == b {
                Point::new(a.x, (a.y + 3.0).min(f64::from(h)))
            } else {
                b
            };
            Stroke::line(StrokeId(i), a, b, Color::BLACK, 1.0).expect("valid line")
        })
        .collect();
    StrokeSet::new(strokes, w, h).expect("valid set")
}

/// Smallest distance from `p` to the chain of flattened strokes.
pub fn distance_to_strokes(p: Point, strokes: &[Stroke], tolerance: f64) -> f64 {
    strokes
        .iter()
        .map(|s| strokeflow::stroke::distance_to_polyline(p, &s.flatten(tolerance)))
        .fold(f64::INFINITY, f64::min)
}
