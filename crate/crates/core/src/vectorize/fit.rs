//! Piecewise cubic fitting of contours (Schneider's least-squares scheme).
//!
//! A contour is first cut at corners found on its simplified polygon. Each
//! smooth run is fitted by one cubic whose end tangents are fixed; if a
//! vertex ends up further than `max_error` from the curve at its parameter
//! (after a few Newton reparameterization passes), the run is split at the
//! worst vertex and both halves are fitted recursively. Runs whose vertices
//! all lie within `max_error` of the chord become lines.

use super::simplify::douglas_peucker;
use super::{Contour, FitParams, VectorizeError};
use crate::stroke::{distance_to_segment, Color, Geometry, Point, Stroke, StrokeId};

/// Control points may leave the bounding box of the fitted vertices by at
/// most this much; fits that overshoot further are split.
const CONTROL_MARGIN: f64 = 0.5;
const REPARAMETERIZE_PASSES: usize = 4;
const TANGENT_LOOKAHEAD: usize = 3;

/// Fits a chain of Line / CubicBezier strokes through the contour. Stroke k
/// ends exactly where stroke k + 1 starts; closed contours end where they
/// began. Every vertex lies within `params.max_error` of the chain.
pub fn fit_curves(contour: &Contour, params: &FitParams) -> Result<Vec<Stroke>, VectorizeError> {
    params.validate()?;
    let first = contour.points()[0];
    if contour.points().iter().all(|&p| p == first) {
        return Err(VectorizeError::DegenerateContour);
    }

    let mut fitter = Fitter {
        params,
        color: contour.color(),
        out: Vec::new(),
    };
    let pts = contour.points();

    if !contour.is_closed() {
        let corners = corner_indices(pts, false, params);
        let mut bounds = vec![0];
        bounds.extend(corners);
        bounds.push(pts.len() - 1);
        for w in bounds.windows(2) {
            let run = &pts[w[0]..=w[1]];
            fitter.fit_run(run, end_tangent(run), end_tangent_rev(run));
        }
        return fitter.finish();
    }

    let n = pts.len();
    let corners = corner_indices(pts, true, params);
    if corners.is_empty() {
        // Smooth loop: cut at vertex 0 and at the vertex farthest from it,
        // with tangents continuous across both cuts.
        let far = (1..n)
            .max_by(|&a, &b| {
                pts[a]
                    .distance(pts[0])
                    .total_cmp(&pts[b].distance(pts[0]))
                    .then(b.cmp(&a))
            })
            .expect("at least two points");
        let cyc = |i: usize| pts[i % n];
        let first_run: Vec<Point> = (0..=far).map(cyc).collect();
        let second_run: Vec<Point> = (far..=n).map(cyc).collect();
        let t0 = center_tangent_cyclic(pts, 0);
        let tf = center_tangent_cyclic(pts, far);
        fitter.fit_run(&first_run, t0 * -1.0, tf);
        fitter.fit_run(&second_run, tf * -1.0, t0);
        return fitter.finish();
    }

    let m = corners.len();
    for k in 0..m {
        let a = corners[k];
        let b = if k + 1 < m {
            corners[k + 1]
        } else {
            corners[0] + n
        };
        let run: Vec<Point> = (a..=b).map(|i| pts[i % n]).collect();
        fitter.fit_run(&run, end_tangent(&run), end_tangent_rev(&run));
    }
    fitter.finish()
}

/// Indices (into `pts`) of simplified vertices whose turning angle exceeds
/// the corner threshold, ascending.
fn corner_indices(pts: &[Point], closed: bool, params: &FitParams) -> Vec<usize> {
    let mut polyline = pts.to_vec();
    if closed {
        polyline.push(pts[0]);
    }
    let mut kept = douglas_peucker(&polyline, params.simplify_epsilon);
    if closed {
        kept.pop();
    }
    let k = kept.len();
    let threshold = params.corner_angle_deg;
    let turning = |prev: Point, at: Point, next: Point| {
        let a = at - prev;
        let b = next - at;
        let denom = a.length() * b.length();
        if denom == 0.0 {
            return 0.0;
        }
        (a.dot(b) / denom).clamp(-1.0, 1.0).acos().to_degrees()
    };
    let mut corners = Vec::new();
    if closed {
        if k < 2 {
            return corners;
        }
        for j in 0..k {
            let prev = pts[kept[(j + k - 1) % k]];
            let next = pts[kept[(j + 1) % k]];
            if turning(prev, pts[kept[j]], next) > threshold {
                corners.push(kept[j]);
            }
        }
    } else {
        for j in 1..k.saturating_sub(1) {
            if turning(pts[kept[j - 1]], pts[kept[j]], pts[kept[j + 1]]) > threshold {
                corners.push(kept[j]);
            }
        }
    }
    corners
}

fn nonzero_or(v: Point, fallback: Point) -> Point {
    let n = v.normalized();
    if n == Point::ORIGIN {
        let f = fallback.normalized();
        if f == Point::ORIGIN {
            Point::new(1.0, 0.0)
        } else {
            f
        }
    } else {
        n
    }
}

/// Unit tangent at the start of a run, pointing into it.
fn end_tangent(run: &[Point]) -> Point {
    let last = run.len() - 1;
    let ahead = TANGENT_LOOKAHEAD.min(last);
    nonzero_or(run[ahead] - run[0], run[last] - run[0])
}

/// Unit tangent at the end of a run, pointing back into it.
fn end_tangent_rev(run: &[Point]) -> Point {
    let last = run.len() - 1;
    let back = last - TANGENT_LOOKAHEAD.min(last);
    nonzero_or(run[back] - run[last], run[0] - run[last])
}

/// Unit tangent at an interior vertex, pointing backwards along the run.
fn center_tangent(run: &[Point], at: usize) -> Point {
    let reach = TANGENT_LOOKAHEAD.min(at).min(run.len() - 1 - at);
    nonzero_or(run[at - reach] - run[at + reach], run[at - 1] - run[at + 1])
}

/// Tangent at vertex `at` of a closed loop, pointing backwards.
fn center_tangent_cyclic(pts: &[Point], at: usize) -> Point {
    let n = pts.len();
    let reach = TANGENT_LOOKAHEAD.min((n - 1) / 2).max(1);
    let before = pts[(at + n - reach) % n];
    let after = pts[(at + reach) % n];
    nonzero_or(before - after, pts[(at + n - 1) % n] - pts[(at + 1) % n])
}

struct Fitter<'a> {
    params: &'a FitParams,
    color: Color,
    out: Vec<Stroke>,
}

impl Fitter<'_> {
    fn finish(self) -> Result<Vec<Stroke>, VectorizeError> {
        Ok(self.out)
    }

    fn push(&mut self, geometry: Geometry) {
        let id = StrokeId(self.out.len() as u32);
        let stroke = Stroke::new(id, geometry, self.color, self.params.stroke_width)
            .expect("fitted geometry is finite");
        self.out.push(stroke);
    }

    /// `t1` points from the first vertex into the run, `t2` from the last
    /// vertex back into it.
    fn fit_run(&mut self, run: &[Point], t1: Point, t2: Point) {
        let first = run[0];
        let last = run[run.len() - 1];
        let tol = self.params.max_error;
        if run.len() == 2
            || run
                .iter()
                .all(|&p| distance_to_segment(p, first, last) <= tol)
        {
            self.push(Geometry::Line([first, last]));
            return;
        }

        let mut u = chord_length_parameters(run);
        let mut bez = generate_bezier(run, &u, t1, t2);
        let (mut err, mut split) = max_error(run, &bez, &u);
        let acceptable =
            |bez: &[Point; 4], err: f64| err <= tol * tol && controls_in_bounds(run, bez);
        if acceptable(&bez, err) {
            self.push(Geometry::Cubic(bez));
            return;
        }
        if err < (4.0 * tol) * (4.0 * tol) {
            for _ in 0..REPARAMETERIZE_PASSES {
                u = reparameterize(run, &u, &bez);
                bez = generate_bezier(run, &u, t1, t2);
                (err, split) = max_error(run, &bez, &u);
                if acceptable(&bez, err) {
                    self.push(Geometry::Cubic(bez));
                    return;
                }
            }
        }

        let split = split.clamp(1, run.len() - 2);
        let tc = center_tangent(run, split);
        self.fit_run(&run[..=split], t1, tc);
        self.fit_run(&run[split..], tc * -1.0, t2);
    }
}

fn controls_in_bounds(run: &[Point], bez: &[Point; 4]) -> bool {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in run {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    bez[1..3].iter().all(|p| {
        p.x >= x0 - CONTROL_MARGIN
            && p.x <= x1 + CONTROL_MARGIN
            && p.y >= y0 - CONTROL_MARGIN
            && p.y <= y1 + CONTROL_MARGIN
    })
}

fn chord_length_parameters(run: &[Point]) -> Vec<f64> {
    let mut u = Vec::with_capacity(run.len());
    u.push(0.0);
    for i in 1..run.len() {
        u.push(u[i - 1] + run[i].distance(run[i - 1]));
    }
    let total = u[run.len() - 1];
    if total > 0.0 {
        u.iter_mut().for_each(|v| *v /= total);
    }
    u
}

fn bernstein(t: f64) -> [f64; 4] {
    let mt = 1.0 - t;
    [mt * mt * mt, 3.0 * mt * mt * t, 3.0 * mt * t * t, t * t * t]
}

fn bezier_at(b: &[Point; 4], t: f64) -> Point {
    let w = bernstein(t);
    b[0] * w[0] + b[1] * w[1] + b[2] * w[2] + b[3] * w[3]
}

/// Least-squares cubic with fixed endpoints and end tangent directions.
fn generate_bezier(run: &[Point], u: &[f64], t1: Point, t2: Point) -> [Point; 4] {
    let first = run[0];
    let last = run[run.len() - 1];
    let (mut c00, mut c01, mut c11, mut x0, mut x1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (p, &t) in run.iter().zip(u) {
        let b = bernstein(t);
        let a0 = t1 * b[1];
        let a1 = t2 * b[2];
        c00 += a0.dot(a0);
        c01 += a0.dot(a1);
        c11 += a1.dot(a1);
        let tmp = *p - (first * (b[0] + b[1]) + last * (b[2] + b[3]));
        x0 += a0.dot(tmp);
        x1 += a1.dot(tmp);
    }
    let det = c00 * c11 - c01 * c01;
    let (mut alpha_l, mut alpha_r) = if det.abs() > 1e-12 {
        ((x0 * c11 - x1 * c01) / det, (c00 * x1 - c01 * x0) / det)
    } else {
        (0.0, 0.0)
    };
    let seg_len = first.distance(last);
    let eps = 1e-6 * seg_len;
    if alpha_l < eps || alpha_r < eps {
        // Wu/Barsky fallback.
        alpha_l = seg_len / 3.0;
        alpha_r = seg_len / 3.0;
    }
    [first, first + t1 * alpha_l, last + t2 * alpha_r, last]
}

/// Largest squared distance between a vertex and the curve point at its
/// parameter, with the vertex index where it occurs.
fn max_error(run: &[Point], bez: &[Point; 4], u: &[f64]) -> (f64, usize) {
    let mut worst = (0.0, run.len() / 2);
    for i in 1..run.len() - 1 {
        let d = bezier_at(bez, u[i]) - run[i];
        let d2 = d.dot(d);
        if d2 > worst.0 {
            worst = (d2, i);
        }
    }
    worst
}

/// One Newton step on each parameter toward the nearest curve point.
fn reparameterize(run: &[Point], u: &[f64], bez: &[Point; 4]) -> Vec<f64> {
    let d1 = [
        (bez[1] - bez[0]) * 3.0,
        (bez[2] - bez[1]) * 3.0,
        (bez[3] - bez[2]) * 3.0,
    ];
    let d2 = [(d1[1] - d1[0]) * 2.0, (d1[2] - d1[1]) * 2.0];
    run.iter()
        .zip(u)
        .map(|(&p, &t)| {
            let mt = 1.0 - t;
            let q = bezier_at(bez, t);
            let q1 = d1[0] * (mt * mt) + d1[1] * (2.0 * mt * t) + d1[2] * (t * t);
            let q2 = d2[0] * mt + d2[1] * t;
            let diff = q - p;
            let numerator = diff.dot(q1);
            let denominator = q1.dot(q1) + diff.dot(q2);
            if denominator.abs() < 1e-12 {
                t
            } else {
                (t - numerator / denominator).clamp(0.0, 1.0)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stroke::{distance_to_polyline, StrokeKind};

    fn contour(pts: &[(f64, f64)], closed: bool) -> Contour {
        Contour::new(
            pts.iter().map(|&(x, y)| Point::new(x, y)).collect(),
            Color::BLACK,
            closed,
        )
        .unwrap()
    }

    fn assert_chain(strokes: &[Stroke]) {
        for w in strokes.windows(2) {
            assert_eq!(w[0].end(), w[1].anchor());
        }
    }

    #[test]
    fn straight_segment_is_one_line() {
        let pts: Vec<(f64, f64)> = (0..=100).map(|i| (i as f64, 20.0)).collect();
        let strokes = fit_curves(&contour(&pts, false), &FitParams::default()).unwrap();
        assert_eq!(strokes.len(), 1);
        assert_eq!(strokes[0].kind(), StrokeKind::Line);
        assert_eq!(
            strokes[0].points(),
            vec![Point::new(0., 20.), Point::new(100., 20.)]
        );
    }

    #[test]
    fn right_angle_splits_into_two_lines() {
        let mut pts: Vec<(f64, f64)> = (0..=30).map(|i| (i as f64, 0.0)).collect();
        pts.extend((1..=30).map(|i| (30.0, i as f64)));
        let strokes = fit_curves(&contour(&pts, false), &FitParams::default()).unwrap();
        assert_eq!(strokes.len(), 2);
        assert!(strokes.iter().all(|s| s.kind() == StrokeKind::Line));
        assert_eq!(strokes[0].end(), Point::new(30., 0.));
        assert_chain(&strokes);
    }

    #[test]
    fn smooth_open_curve_stays_within_error() {
        let pts: Vec<(f64, f64)> = (0..=80)
            .map(|i| {
                let x = i as f64;
                (x, 30.0 + 12.0 * (x / 13.0).sin())
            })
            .collect();
        let c = contour(&pts, false);
        let params = FitParams::default();
        let strokes = fit_curves(&c, &params).unwrap();
        assert_chain(&strokes);
        let chain: Vec<Point> = strokes.iter().flat_map(|s| s.flatten(0.001)).collect();
        for p in c.points() {
            assert!(distance_to_polyline(*p, &chain) <= params.max_error + 0.001);
        }
    }

    #[test]
    fn closed_loop_returns_to_start() {
        let pts: Vec<(f64, f64)> = (0..60)
            .map(|i| {
                let a = i as f64 / 60.0 * std::f64::consts::TAU;
                (50.0 + 20.0 * a.cos(), 50.0 + 20.0 * a.sin())
            })
            .collect();
        let strokes = fit_curves(&contour(&pts, true), &FitParams::default()).unwrap();
        assert!(
            strokes
                .iter()
                .filter(|s| s.kind() == StrokeKind::CubicBezier)
                .count()
                >= 2
        );
        assert_chain(&strokes);
        assert_eq!(strokes.last().unwrap().end(), strokes[0].anchor());
    }

    #[test]
    fn out_and_back_line() {
        let c = contour(
            &[
                (2.5, 1.5),
                (3.5, 1.5),
                (4.5, 1.5),
                (5.5, 1.5),
                (4.5, 1.5),
                (3.5, 1.5),
            ],
            true,
        );
        let strokes = fit_curves(&c, &FitParams::default()).unwrap();
        assert_eq!(strokes.len(), 2);
        assert!(strokes.iter().all(|s| s.kind() == StrokeKind::Line));
        assert_chain(&strokes);
    }
}
