//! Stroke primitives and containers shared by every stage of the pipeline.
//!
//! A [`Stroke`] is one drawable curve: a line, a quadratic or cubic Bézier,
//! a circular arc or an elliptical arc, with a color, a width and the stream
//! (sketch or paint) it belongs to. Strokes are immutable once built; the
//! constructors enforce arity, finiteness and the arc canonical forms.

use std::collections::HashSet;
use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Cross-product magnitude below which three arc points count as collinear.
pub const COLLINEAR_EPSILON: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrokeError {
    #[error("stroke {0} has a non-finite coordinate")]
    NonFinite(StrokeId),
    #[error("stroke {id} has invalid width {width}")]
    InvalidWidth { id: StrokeId, width: f64 },
    #[error("stroke {id}: {kind:?} needs {expected} control points, got {got}")]
    Arity {
        id: StrokeId,
        kind: StrokeKind,
        expected: usize,
        got: usize,
    },
    #[error("stroke {0}: elliptical arc needs positive radii")]
    InvalidRadius(StrokeId),
    #[error("stroke {0}: elliptical arc endpoints coincide")]
    DegenerateArc(StrokeId),
    #[error("canvas must be at least 1x1, got {width}x{height}")]
    EmptyCanvas { width: u32, height: u32 },
    #[error("duplicate stroke id {0}")]
    DuplicateId(StrokeId),
    #[error("stroke {0} lies outside the canvas")]
    OutOfCanvas(StrokeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn length(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).length()
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }

    /// Unit vector in the same direction, or zero for the zero vector.
    pub fn normalized(self) -> Point {
        let len = self.length();
        if len > 0.0 {
            self * (1.0 / len)
        } else {
            Point::ORIGIN
        }
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Distance from `p` to the closed segment `a`-`b`.
pub fn distance_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Distance from `p` to the nearest segment of an open polyline.
pub fn distance_to_polyline(p: Point, polyline: &[Point]) -> f64 {
    match polyline {
        [] => f64::INFINITY,
        [only] => p.distance(*only),
        _ => polyline
            .windows(2)
            .map(|w| distance_to_segment(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Center and radius of the circle through three points, or `None` when the
/// points are collinear within [`COLLINEAR_EPSILON`].
pub fn circle_through(a: Point, b: Point, c: Point) -> Option<(Point, f64)> {
    let cross = (b - a).cross(c - a);
    if cross.abs() <= COLLINEAR_EPSILON {
        return None;
    }
    let d = 2.0 * cross;
    let ab = b - a;
    let ac = c - a;
    let ab2 = ab.dot(ab);
    let ac2 = ac.dot(ac);
    let ux = (ac.y * ab2 - ab.y * ac2) / d;
    let uy = (ab.x * ac2 - ac.x * ab2) / d;
    let center = Point::new(a.x + ux, a.y + uy);
    Some((center, center.distance(a)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Color {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Color {
    pub const BLACK: Color = Color::rgb(0, 0, 0);
    pub const WHITE: Color = Color::rgb(255, 255, 255);

    pub const fn rgb(r: u8, g: u8, b: u8) -> Self {
        Color { r, g, b }
    }

    pub const fn gray(v: u8) -> Self {
        Color { r: v, g: v, b: v }
    }

    pub fn is_grayscale(self) -> bool {
        self.r == self.g && self.g == self.b
    }

    /// Luma with the 0.299/0.587/0.114 weights, in `[0, 255]`.
    pub fn luminance(self) -> f64 {
        f64::from(299 * u32::from(self.r) + 587 * u32::from(self.g) + 114 * u32::from(self.b))
            / 1000.0
    }

    pub fn to_grayscale(self) -> Color {
        Color::gray(self.luminance().round() as u8)
    }

    pub fn to_hex(self) -> String {
        format!("#{:02X}{:02X}{:02X}", self.r, self.g, self.b)
    }

    /// Parses `#RRGGBB` or `#RGB`.
    pub fn from_hex(s: &str) -> Option<Color> {
        let hex = s.strip_prefix('#')?;
        if !hex.is_ascii() {
            return None;
        }
        let channel = |h: &str| u8::from_str_radix(h, 16).ok();
        match hex.len() {
            6 => Some(Color::rgb(
                channel(&hex[0..2])?,
                channel(&hex[2..4])?,
                channel(&hex[4..6])?,
            )),
            3 => {
                let expand = |h: &str| channel(h).map(|v| v * 17);
                Some(Color::rgb(
                    expand(&hex[0..1])?,
                    expand(&hex[1..2])?,
                    expand(&hex[2..3])?,
                ))
            }
            _ => None,
        }
    }

    pub(crate) fn packed(self) -> u32 {
        (u32::from(self.r) << 16) | (u32::from(self.g) << 8) | u32::from(self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StrokeId(pub u32);

impl fmt::Display for StrokeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrokeKind {
    Line,
    QuadraticBezier,
    CubicBezier,
    CircularArc,
    EllipticalArc,
}

impl StrokeKind {
    /// Number of control points exposed by [`Stroke::points`].
    pub fn arity(self) -> usize {
        match self {
            StrokeKind::Line => 2,
            StrokeKind::QuadraticBezier => 3,
            StrokeKind::CubicBezier => 4,
            StrokeKind::CircularArc | StrokeKind::EllipticalArc => 3,
        }
    }

    /// Short tag used in the JSON manifest.
    pub fn tag(self) -> &'static str {
        match self {
            StrokeKind::Line => "line",
            StrokeKind::QuadraticBezier => "qbc",
            StrokeKind::CubicBezier => "cbc",
            StrokeKind::CircularArc => "carc",
            StrokeKind::EllipticalArc => "earc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Stream {
    #[default]
    Sketch,
    Paint,
}

impl Stream {
    pub fn as_str(self) -> &'static str {
        match self {
            Stream::Sketch => "sketch",
            Stream::Paint => "paint",
        }
    }
}

/// SVG arc parameter bundle. Radii are stored after the out-of-range
/// correction, so they always describe an ellipse through both endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcParams {
    pub rx: f64,
    pub ry: f64,
    /// Rotation of the ellipse x-axis, in degrees.
    pub x_axis_rotation: f64,
    pub large_arc: bool,
    pub sweep: bool,
}

/// Center parameterization of an elliptical arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcCenter {
    pub center: Point,
    pub rx: f64,
    pub ry: f64,
    /// Rotation in radians.
    pub phi: f64,
    pub start_angle: f64,
    /// Signed sweep in radians; positive means increasing angle.
    pub sweep_angle: f64,
}

impl ArcCenter {
    pub fn point_at_angle(&self, theta: f64) -> Point {
        let (sin_phi, cos_phi) = self.phi.sin_cos();
        let (sin_t, cos_t) = theta.sin_cos();
        Point::new(
            self.center.x + self.rx * cos_phi * cos_t - self.ry * sin_phi * sin_t,
            self.center.y + self.rx * sin_phi * cos_t + self.ry * cos_phi * sin_t,
        )
    }

    pub fn point_at(&self, t: f64) -> Point {
        self.point_at_angle(self.start_angle + self.sweep_angle * t)
    }
}

/// Endpoint to center conversion following the SVG implementation notes,
/// including the radii scale-up when the ellipse cannot reach both ends.
/// Returns the corrected radii alongside the center form.
pub fn arc_to_center(start: Point, end: Point, arc: &ArcParams) -> ArcCenter {
    let phi = arc.x_axis_rotation.to_radians();
    let (sin_phi, cos_phi) = phi.sin_cos();
    let dx2 = (start.x - end.x) / 2.0;
    let dy2 = (start.y - end.y) / 2.0;
    let x1p = cos_phi * dx2 + sin_phi * dy2;
    let y1p = -sin_phi * dx2 + cos_phi * dy2;

    let mut rx = arc.rx.abs();
    let mut ry = arc.ry.abs();
    let lambda = (x1p * x1p) / (rx * rx) + (y1p * y1p) / (ry * ry);
    if lambda > 1.0 {
        let s = lambda.sqrt();
        rx *= s;
        ry *= s;
    }

    let rx2 = rx * rx;
    let ry2 = ry * ry;
    let num = rx2 * ry2 - rx2 * y1p * y1p - ry2 * x1p * x1p;
    let den = rx2 * y1p * y1p + ry2 * x1p * x1p;
    let mut coef = if den > 0.0 {
        (num / den).max(0.0).sqrt()
    } else {
        0.0
    };
    if arc.large_arc == arc.sweep {
        coef = -coef;
    }
    let cxp = coef * rx * y1p / ry;
    let cyp = -coef * ry * x1p / rx;
    let center = Point::new(
        cos_phi * cxp - sin_phi * cyp + (start.x + end.x) / 2.0,
        sin_phi * cxp + cos_phi * cyp + (start.y + end.y) / 2.0,
    );

    let u = Point::new((x1p - cxp) / rx, (y1p - cyp) / ry);
    let v = Point::new((-x1p - cxp) / rx, (-y1p - cyp) / ry);
    let start_angle = u.y.atan2(u.x);
    let mut sweep_angle = (u.cross(v)).atan2(u.dot(v));
    if !arc.sweep && sweep_angle > 0.0 {
        sweep_angle -= TAU;
    } else if arc.sweep && sweep_angle < 0.0 {
        sweep_angle += TAU;
    }
    ArcCenter {
        center,
        rx,
        ry,
        phi,
        start_angle,
        sweep_angle,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    Line([Point; 2]),
    Quadratic([Point; 3]),
    Cubic([Point; 4]),
    /// Start, on-arc point, end. Canonicalized so the middle point sits at
    /// the angular midpoint of the arc.
    CircularArc([Point; 3]),
    EllipticalArc {
        start: Point,
        end: Point,
        arc: ArcParams,
    },
}

impl Geometry {
    pub fn kind(&self) -> StrokeKind {
        match self {
            Geometry::Line(_) => StrokeKind::Line,
            Geometry::Quadratic(_) => StrokeKind::QuadraticBezier,
            Geometry::Cubic(_) => StrokeKind::CubicBezier,
            Geometry::CircularArc(_) => StrokeKind::CircularArc,
            Geometry::EllipticalArc { .. } => StrokeKind::EllipticalArc,
        }
    }

    /// Builds the geometry for `kind` from a control point list. Elliptical
    /// arcs cannot be rebuilt from three points and are rejected.
    pub fn from_points(kind: StrokeKind, points: &[Point]) -> Option<Geometry> {
        if points.len() != kind.arity() {
            return None;
        }
        Some(match kind {
            StrokeKind::Line => Geometry::Line([points[0], points[1]]),
            StrokeKind::QuadraticBezier => Geometry::Quadratic([points[0], points[1], points[2]]),
            StrokeKind::CubicBezier => {
                Geometry::Cubic([points[0], points[1], points[2], points[3]])
            }
            StrokeKind::CircularArc => Geometry::CircularArc([points[0], points[1], points[2]]),
            StrokeKind::EllipticalArc => return None,
        })
    }
}

/// Circle form of a three-point arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleArc {
    pub center: Point,
    pub radius: f64,
    pub start_angle: f64,
    /// Signed sweep in radians, in `(-2π, 2π)`.
    pub sweep_angle: f64,
}

impl CircleArc {
    pub fn from_points(start: Point, mid: Point, end: Point) -> Option<CircleArc> {
        let (center, radius) = circle_through(start, mid, end)?;
        let angle = |p: Point| (p.y - center.y).atan2(p.x - center.x);
        let a0 = angle(start);
        let am = angle(mid);
        let a1 = angle(end);
        let ccw = (a1 - a0).rem_euclid(TAU);
        let to_mid = (am - a0).rem_euclid(TAU);
        let sweep_angle = if to_mid < ccw { ccw } else { ccw - TAU };
        Some(CircleArc {
            center,
            radius,
            start_angle: a0,
            sweep_angle,
        })
    }

    pub fn point_at(&self, t: f64) -> Point {
        let theta = self.start_angle + self.sweep_angle * t;
        let (s, c) = theta.sin_cos();
        Point::new(
            self.center.x + self.radius * c,
            self.center.y + self.radius * s,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stroke {
    id: StrokeId,
    geometry: Geometry,
    color: Color,
    width: f64,
    stream: Stream,
    filled: bool,
}

impl Stroke {
    /// Validates and canonicalizes a stroke. Collinear circular arcs become
    /// lines; elliptical arcs with equal radii become circular arcs.
    pub fn new(
        id: StrokeId,
        geometry: Geometry,
        color: Color,
        width: f64,
    ) -> Result<Stroke, StrokeError> {
        if !(width.is_finite() && width > 0.0) {
            return Err(StrokeError::InvalidWidth { id, width });
        }
        let geometry = canonicalize(id, geometry)?;
        Ok(Stroke {
            id,
            geometry,
            color,
            width,
            stream: Stream::Sketch,
            filled: false,
        })
    }

    /// Builds a stroke from a kind and its control point list.
    pub fn from_points(
        id: StrokeId,
        kind: StrokeKind,
        points: &[Point],
        color: Color,
        width: f64,
    ) -> Result<Stroke, StrokeError> {
        let geometry = Geometry::from_points(kind, points).ok_or(StrokeError::Arity {
            id,
            kind,
            expected: kind.arity(),
            got: points.len(),
        })?;
        Stroke::new(id, geometry, color, width)
    }

    pub fn line(
        id: StrokeId,
        a: Point,
        b: Point,
        color: Color,
        width: f64,
    ) -> Result<Stroke, StrokeError> {
        Stroke::new(id, Geometry::Line([a, b]), color, width)
    }

    pub fn with_stream(mut self, stream: Stream) -> Stroke {
        self.stream = stream;
        self
    }

    pub fn with_filled(mut self, filled: bool) -> Stroke {
        self.filled = filled;
        self
    }

    pub fn with_id(mut self, id: StrokeId) -> Stroke {
        self.id = id;
        self
    }

    pub fn with_color(mut self, color: Color) -> Stroke {
        self.color = color;
        self
    }

    pub fn id(&self) -> StrokeId {
        self.id
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn kind(&self) -> StrokeKind {
        self.geometry.kind()
    }

    pub fn color(&self) -> Color {
        self.color
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn stream(&self) -> Stream {
        self.stream
    }

    pub fn filled(&self) -> bool {
        self.filled
    }

    /// Control points. Elliptical arcs expose start, the point at the
    /// parameter midpoint, and end.
    pub fn points(&self) -> Vec<Point> {
        match &self.geometry {
            Geometry::Line(p) => p.to_vec(),
            Geometry::Quadratic(p) => p.to_vec(),
            Geometry::Cubic(p) => p.to_vec(),
            Geometry::CircularArc(p) => p.to_vec(),
            Geometry::EllipticalArc { start, end, arc } => {
                let mid = arc_to_center(*start, *end, arc).point_at(0.5);
                vec![*start, mid, *end]
            }
        }
    }

    /// The clustering feature: the first control point.
    pub fn anchor(&self) -> Point {
        match &self.geometry {
            Geometry::Line(p) => p[0],
            Geometry::Quadratic(p) => p[0],
            Geometry::Cubic(p) => p[0],
            Geometry::CircularArc(p) => p[0],
            Geometry::EllipticalArc { start, .. } => *start,
        }
    }

    /// Geometric end of the curve.
    pub fn end(&self) -> Point {
        match &self.geometry {
            Geometry::Line(p) => p[1],
            Geometry::Quadratic(p) => p[2],
            Geometry::Cubic(p) => p[3],
            Geometry::CircularArc(p) => p[2],
            Geometry::EllipticalArc { end, .. } => *end,
        }
    }

    /// Point on the curve at parameter `t` in `[0, 1]`. Arcs are
    /// parameterized by angle.
    pub fn eval(&self, t: f64) -> Point {
        match &self.geometry {
            Geometry::Line(p) => p[0].lerp(p[1], t),
            Geometry::Quadratic(p) => {
                let mt = 1.0 - t;
                p[0] * (mt * mt) + p[1] * (2.0 * mt * t) + p[2] * (t * t)
            }
            Geometry::Cubic(p) => cubic_point(p, t),
            Geometry::CircularArc(p) => match CircleArc::from_points(p[0], p[1], p[2]) {
                Some(arc) => arc.point_at(t),
                None => p[0].lerp(p[2], t),
            },
            Geometry::EllipticalArc { start, end, arc } => {
                arc_to_center(*start, *end, arc).point_at(t)
            }
        }
    }

    /// Polyline approximation within `tolerance` of the curve. The first and
    /// last vertices are exactly the stroke's endpoints.
    pub fn flatten(&self, tolerance: f64) -> Vec<Point> {
        assert!(tolerance > 0.0, "flatten tolerance must be positive");
        let mut out = Vec::new();
        match &self.geometry {
            Geometry::Line(p) => out.extend_from_slice(p),
            Geometry::Quadratic(p) => {
                out.push(p[0]);
                flatten_bezier(*p, tolerance, 0, &mut out);
            }
            Geometry::Cubic(p) => {
                out.push(p[0]);
                flatten_bezier(*p, tolerance, 0, &mut out);
            }
            Geometry::CircularArc(p) => match CircleArc::from_points(p[0], p[1], p[2]) {
                Some(arc) => {
                    let n = arc_steps(arc.sweep_angle, arc.radius, tolerance);
                    out.push(p[0]);
                    out.extend((1..n).map(|i| arc.point_at(i as f64 / n as f64)));
                    out.push(p[2]);
                }
                None => out.extend_from_slice(&[p[0], p[2]]),
            },
            Geometry::EllipticalArc { start, end, arc } => {
                let c = arc_to_center(*start, *end, arc);
                let n = arc_steps(c.sweep_angle, c.rx.max(c.ry), tolerance);
                out.push(*start);
                out.extend((1..n).map(|i| c.point_at(i as f64 / n as f64)));
                out.push(*end);
            }
        }
        out
    }
}

fn canonicalize(id: StrokeId, geometry: Geometry) -> Result<Geometry, StrokeError> {
    let finite = match &geometry {
        Geometry::Line(p) => p.iter().all(|q| q.is_finite()),
        Geometry::Quadratic(p) => p.iter().all(|q| q.is_finite()),
        Geometry::Cubic(p) => p.iter().all(|q| q.is_finite()),
        Geometry::CircularArc(p) => p.iter().all(|q| q.is_finite()),
        Geometry::EllipticalArc { start, end, arc } => {
            start.is_finite()
                && end.is_finite()
                && arc.rx.is_finite()
                && arc.ry.is_finite()
                && arc.x_axis_rotation.is_finite()
        }
    };
    if !finite {
        return Err(StrokeError::NonFinite(id));
    }
    Ok(match geometry {
        Geometry::CircularArc([a, m, b]) => match CircleArc::from_points(a, m, b) {
            Some(arc) => Geometry::CircularArc([a, arc.point_at(0.5), b]),
            None => Geometry::Line([a, b]),
        },
        Geometry::EllipticalArc { start, end, arc } => {
            if arc.rx <= 0.0 || arc.ry <= 0.0 {
                return Err(StrokeError::InvalidRadius(id));
            }
            if start == end {
                return Err(StrokeError::DegenerateArc(id));
            }
            let center = arc_to_center(start, end, &arc);
            if center.rx == center.ry {
                let mid = center.point_at(0.5);
                match CircleArc::from_points(start, mid, end) {
                    Some(c) => Geometry::CircularArc([start, c.point_at(0.5), end]),
                    None => Geometry::Line([start, end]),
                }
            } else {
                Geometry::EllipticalArc {
                    start,
                    end,
                    arc: ArcParams {
                        rx: center.rx,
                        ry: center.ry,
                        ..arc
                    },
                }
            }
        }
        other => other,
    })
}

fn cubic_point(p: &[Point; 4], t: f64) -> Point {
    let mt = 1.0 - t;
    p[0] * (mt * mt * mt)
        + p[1] * (3.0 * mt * mt * t)
        + p[2] * (3.0 * mt * t * t)
        + p[3] * (t * t * t)
}

fn arc_steps(sweep: f64, radius: f64, tolerance: f64) -> usize {
    let max_step = if tolerance >= radius {
        FRAC_PI_2
    } else {
        (2.0 * (1.0 - tolerance / radius).acos()).min(FRAC_PI_2)
    };
    ((sweep.abs() / max_step).ceil() as usize).max(2)
}

const MAX_SUBDIVISION_DEPTH: u32 = 24;

/// Adaptive de Casteljau subdivision. A piece is emitted as a chord once all
/// of its control points are within `tolerance` of that chord; the convex
/// hull property then bounds the curve's deviation by the same amount.
fn flatten_bezier<const N: usize>(p: [Point; N], tolerance: f64, depth: u32, out: &mut Vec<Point>) {
    let first = p[0];
    let last = p[N - 1];
    let flat = p[1..N - 1]
        .iter()
        .all(|&q| distance_to_segment(q, first, last) <= tolerance);
    if flat || depth >= MAX_SUBDIVISION_DEPTH {
        out.push(last);
        return;
    }
    let (left, right) = split_bezier(p, 0.5);
    flatten_bezier(left, tolerance, depth + 1, out);
    flatten_bezier(right, tolerance, depth + 1, out);
}

pub(crate) fn split_bezier<const N: usize>(p: [Point; N], t: f64) -> ([Point; N], [Point; N]) {
    let mut work = p;
    let mut left = p;
    let mut right = p;
    left[0] = work[0];
    right[N - 1] = work[N - 1];
    for level in 1..N {
        for i in 0..N - level {
            work[i] = work[i].lerp(work[i + 1], t);
        }
        left[level] = work[0];
        right[N - 1 - level] = work[N - 1 - level];
    }
    (left, right)
}

/// An ordered collection of strokes on a canvas.
#[derive(Debug, Clone, PartialEq)]
pub struct StrokeSet {
    strokes: Vec<Stroke>,
    width: u32,
    height: u32,
}

impl StrokeSet {
    pub fn new(strokes: Vec<Stroke>, width: u32, height: u32) -> Result<StrokeSet, StrokeError> {
        if width == 0 || height == 0 {
            return Err(StrokeError::EmptyCanvas { width, height });
        }
        let mut seen = HashSet::with_capacity(strokes.len());
        let (w, h) = (f64::from(width), f64::from(height));
        for stroke in &strokes {
            if !seen.insert(stroke.id()) {
                return Err(StrokeError::DuplicateId(stroke.id()));
            }
            let inside = stroke
                .points()
                .iter()
                .all(|p| p.x >= -0.1 * w && p.x <= 1.1 * w && p.y >= -0.1 * h && p.y <= 1.1 * h);
            if !inside {
                return Err(StrokeError::OutOfCanvas(stroke.id()));
            }
        }
        Ok(StrokeSet {
            strokes,
            width,
            height,
        })
    }

    pub fn empty(width: u32, height: u32) -> Result<StrokeSet, StrokeError> {
        StrokeSet::new(Vec::new(), width, height)
    }

    pub fn strokes(&self) -> &[Stroke] {
        &self.strokes
    }

    pub fn into_strokes(self) -> Vec<Stroke> {
        self.strokes
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn len(&self) -> usize {
        self.strokes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strokes.is_empty()
    }

    pub fn get(&self, id: StrokeId) -> Option<&Stroke> {
        self.strokes.iter().find(|s| s.id() == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn black(kind: StrokeKind, pts: &[(f64, f64)]) -> Stroke {
        let pts: Vec<Point> = pts.iter().map(|&(x, y)| Point::new(x, y)).collect();
        Stroke::from_points(StrokeId(0), kind, &pts, Color::BLACK, 1.0).unwrap()
    }

    #[test]
    fn anchor_is_first_control_point() {
        assert_eq!(
            black(StrokeKind::Line, &[(0., 0.), (10., 0.)]).anchor(),
            Point::new(0., 0.)
        );
        assert_eq!(
            black(
                StrokeKind::CubicBezier,
                &[(1., 2.), (3., 4.), (5., 6.), (7., 8.)]
            )
            .anchor(),
            Point::new(1., 2.)
        );
        assert_eq!(
            black(StrokeKind::CircularArc, &[(5., 0.), (0., 5.), (-5., 0.)]).anchor(),
            Point::new(5., 0.)
        );
    }

    #[test]
    fn line_flattens_to_itself() {
        let s = black(StrokeKind::Line, &[(0., 0.), (10., 0.)]);
        assert_eq!(
            s.flatten(0.5),
            vec![Point::new(0., 0.), Point::new(10., 0.)]
        );
    }

    #[test]
    fn quadratic_passes_near_midpoint() {
        let s = black(
            StrokeKind::QuadraticBezier,
            &[(0., 0.), (5., 10.), (10., 0.)],
        );
        let poly = s.flatten(0.1);
        assert!(distance_to_polyline(Point::new(5., 5.), &poly) <= 0.1);
        assert_eq!(poly[0], Point::new(0., 0.));
        assert_eq!(*poly.last().unwrap(), Point::new(10., 0.));
    }

    #[test]
    fn circular_arc_vertices_on_circle() {
        // Center by intersecting the perpendicular bisectors of the two
        // chords: chord (5,0)-(0,5) bisector is y = x, chord (0,5)-(-5,0)
        // bisector is y = -x, so the center is the origin.
        let s = black(StrokeKind::CircularArc, &[(5., 0.), (0., 5.), (-5., 0.)]);
        let poly = s.flatten(0.01);
        assert!(poly.len() > 3);
        for p in poly {
            assert!((p.length() - 5.0).abs() <= 0.01, "{p:?}");
        }
    }

    #[test]
    fn collinear_arc_becomes_line() {
        let s = black(StrokeKind::CircularArc, &[(0., 0.), (5., 0.), (10., 0.)]);
        assert_eq!(s.kind(), StrokeKind::Line);
        assert_eq!(s.points(), vec![Point::new(0., 0.), Point::new(10., 0.)]);
    }

    #[test]
    fn arc_mid_point_is_canonicalized() {
        let off_mid = Point::new(5.0 * 0.6, 5.0 * 0.8);
        let s = Stroke::from_points(
            StrokeId(1),
            StrokeKind::CircularArc,
            &[Point::new(5., 0.), off_mid, Point::new(-5., 0.)],
            Color::BLACK,
            1.0,
        )
        .unwrap();
        let mid = s.points()[1];
        assert!(mid.distance(Point::new(0., 5.)) < 1e-12);
    }

    #[test]
    fn elliptical_arc_with_equal_radii_is_circular() {
        let s = Stroke::new(
            StrokeId(0),
            Geometry::EllipticalArc {
                start: Point::new(0., 0.),
                end: Point::new(10., 0.),
                arc: ArcParams {
                    rx: 5.0,
                    ry: 5.0,
                    x_axis_rotation: 0.0,
                    large_arc: false,
                    sweep: true,
                },
            },
            Color::BLACK,
            1.0,
        )
        .unwrap();
        assert_eq!(s.kind(), StrokeKind::CircularArc);
        let arc = match s.geometry() {
            Geometry::CircularArc(p) => CircleArc::from_points(p[0], p[1], p[2]).unwrap(),
            _ => unreachable!(),
        };
        assert!(arc.center.distance(Point::new(5., 0.)) < 1e-9);
    }

    #[test]
    fn radii_are_scaled_up_when_too_small() {
        let arc = ArcParams {
            rx: 1.0,
            ry: 2.0,
            x_axis_rotation: 0.0,
            large_arc: false,
            sweep: true,
        };
        let c = arc_to_center(Point::new(0., 0.), Point::new(10., 0.), &arc);
        assert!((c.rx - 5.0).abs() < 1e-9);
        assert!((c.ry - 10.0).abs() < 1e-9);
        assert!(c.point_at(0.0).distance(Point::new(0., 0.)) < 1e-9);
        assert!(c.point_at(1.0).distance(Point::new(10., 0.)) < 1e-9);
    }

    #[test]
    fn rejects_bad_strokes() {
        let p = Point::new(0., 0.);
        assert!(matches!(
            Stroke::line(StrokeId(3), p, p, Color::BLACK, 0.0),
            Err(StrokeError::InvalidWidth { .. })
        ));
        assert!(matches!(
            Stroke::line(StrokeId(3), p, Point::new(f64::NAN, 0.), Color::BLACK, 1.0),
            Err(StrokeError::NonFinite(_))
        ));
        assert!(matches!(
            Stroke::from_points(
                StrokeId(3),
                StrokeKind::CubicBezier,
                &[p, p],
                Color::BLACK,
                1.0
            ),
            Err(StrokeError::Arity {
                expected: 4,
                got: 2,
                ..
            })
        ));
    }

    #[test]
    fn stroke_set_validation() {
        let a = Stroke::line(
            StrokeId(0),
            Point::new(0., 0.),
            Point::new(5., 5.),
            Color::BLACK,
            1.,
        )
        .unwrap();
        assert!(matches!(
            StrokeSet::new(vec![a.clone(), a.clone()], 10, 10),
            Err(StrokeError::DuplicateId(_))
        ));
        assert!(matches!(
            StrokeSet::new(vec![], 0, 10),
            Err(StrokeError::EmptyCanvas { .. })
        ));
        let far = Stroke::line(
            StrokeId(1),
            Point::new(0., 0.),
            Point::new(50., 5.),
            Color::BLACK,
            1.,
        )
        .unwrap();
        assert!(matches!(
            StrokeSet::new(vec![far], 10, 10),
            Err(StrokeError::OutOfCanvas(_))
        ));
    }

    #[test]
    fn hex_colors() {
        assert_eq!(Color::from_hex("#FF8000"), Some(Color::rgb(255, 128, 0)));
        assert_eq!(Color::from_hex("#f80"), Some(Color::rgb(255, 136, 0)));
        assert_eq!(Color::from_hex("FF8000"), None);
        assert_eq!(Color::rgb(1, 2, 255).to_hex(), "#0102FF");
    }
}
