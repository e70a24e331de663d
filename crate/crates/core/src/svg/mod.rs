//! SVG subset ingestion and static / animated SVG output.
//!
//! Accepted input: an `svg` root holding `g` groups and `path` elements.
//! Groups and paths may carry translate/scale transforms. Every path is split
//! into one stroke per segment. Descriptive elements (`title`, `desc`,
//! `metadata`) and `animate`/`set` children of paths are ignored; anything
//! else is reported as [`SvgError::UnsupportedFeature`].

mod emit;
mod path;

use thiserror::Error;

use crate::stroke::{ArcParams, Color, Geometry, Point, Stroke, StrokeError, StrokeId, StrokeSet};

pub use emit::{emit_animated_svg, emit_static_svg, format_number, path_data};
pub use path::{parse_path_data, PathDataError, Segment};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SvgError {
    #[error("MalformedXml: {0}")]
    MalformedXml(String),
    #[error("UnsupportedFeature: {0}")]
    UnsupportedFeature(String),
    #[error("BadPathData at byte {position}: {message}")]
    BadPathData {
        position: usize,
        message: &'static str,
    },
    #[error("invalid attribute {name}={value:?}")]
    InvalidAttribute { name: String, value: String },
    #[error("svg root needs width/height or a viewBox")]
    MissingCanvas,
    #[error(transparent)]
    Stroke(#[from] StrokeError),
}

impl SvgError {
    pub fn code(&self) -> &'static str {
        match self {
            SvgError::MalformedXml(_) => "MalformedXml",
            SvgError::UnsupportedFeature(_) => "UnsupportedFeature",
            SvgError::BadPathData { .. } => "BadPathData",
            SvgError::InvalidAttribute { .. } => "InvalidAttribute",
            SvgError::MissingCanvas => "MissingCanvas",
            SvgError::Stroke(_) => "InvalidStroke",
        }
    }
}

impl From<PathDataError> for SvgError {
    fn from(e: PathDataError) -> Self {
        SvgError::BadPathData {
            position: e.position,
            message: e.message,
        }
    }
}

/// Scale followed by translation: `p -> (sx·x + tx, sy·y + ty)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Affine {
    sx: f64,
    sy: f64,
    tx: f64,
    ty: f64,
}

impl Affine {
    const IDENTITY: Affine = Affine {
        sx: 1.0,
        sy: 1.0,
        tx: 0.0,
        ty: 0.0,
    };

    /// `self ∘ inner`.
    fn then_inner(self, inner: Affine) -> Affine {
        Affine {
            sx: self.sx * inner.sx,
            sy: self.sy * inner.sy,
            tx: self.sx * inner.tx + self.tx,
            ty: self.sy * inner.ty + self.ty,
        }
    }

    fn apply(self, p: Point) -> Point {
        Point::new(self.sx * p.x + self.tx, self.sy * p.y + self.ty)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Paint {
    Unset,
    None,
    Color(Color),
}

#[derive(Debug, Clone, Copy)]
struct Style {
    stroke: Paint,
    fill: Paint,
    stroke_width: Option<f64>,
    transform: Affine,
}

const IGNORED_ELEMENTS: [&str; 3] = ["title", "desc", "metadata"];
const UNSUPPORTED_ATTRIBUTES: [&str; 4] = ["clip-path", "mask", "filter", "clip"];

/// Parses an SVG document into a stroke set. Strokes are numbered from 0 in
/// document order.
pub fn parse_svg(text: &str) -> Result<StrokeSet, SvgError> {
    let doc =
        roxmltree::Document::parse(text).map_err(|e| SvgError::MalformedXml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "svg" {
        return Err(SvgError::UnsupportedFeature(format!(
            "root element <{}>",
            root.tag_name().name()
        )));
    }
    let (width, height, view) = canvas(&root)?;
    let mut style = Style {
        stroke: Paint::Unset,
        fill: Paint::Unset,
        stroke_width: None,
        transform: view,
    };
    style = apply_presentation(&root, style)?;
    let mut strokes = Vec::new();
    walk_children(&root, style, &mut strokes)?;
    Ok(StrokeSet::new(strokes, width, height)?)
}

/// Same as [`parse_svg`] for raw bytes; invalid UTF-8 is malformed XML.
pub fn parse_svg_bytes(bytes: &[u8]) -> Result<StrokeSet, SvgError> {
    let text = std::str::from_utf8(bytes).map_err(|e| SvgError::MalformedXml(e.to_string()))?;
    parse_svg(text)
}

fn walk_children(
    node: &roxmltree::Node<'_, '_>,
    style: Style,
    strokes: &mut Vec<Stroke>,
) -> Result<(), SvgError> {
    for child in node.children().filter(|n| n.is_element()) {
        let name = child.tag_name().name();
        match name {
            "g" => {
                let inner = apply_presentation(&child, style)?;
                walk_children(&child, inner, strokes)?;
            }
            "path" => {
                for sub in child.children().filter(|n| n.is_element()) {
                    let sub_name = sub.tag_name().name();
                    if !matches!(sub_name, "animate" | "set")
                        && !IGNORED_ELEMENTS.contains(&sub_name)
                    {
                        return Err(SvgError::UnsupportedFeature(format!(
                            "<{sub_name}> inside <path>"
                        )));
                    }
                }
                let path_style = apply_presentation(&child, style)?;
                ingest_path(&child, path_style, strokes)?;
            }
            n if IGNORED_ELEMENTS.contains(&n) => {}
            other => return Err(SvgError::UnsupportedFeature(format!("<{other}>"))),
        }
    }
    Ok(())
}

fn parse_length(name: &str, value: &str) -> Result<f64, SvgError> {
    let v = value.trim();
    let v = v.strip_suffix("px").unwrap_or(v).trim();
    match v.parse::<f64>() {
        Ok(n) if n.is_finite() => Ok(n),
        _ if v.ends_with(|c: char| c.is_ascii_alphabetic() || c == '%') => Err(
            SvgError::UnsupportedFeature(format!("length unit in {name}={value:?}")),
        ),
        _ => Err(SvgError::InvalidAttribute {
            name: name.to_string(),
            value: value.to_string(),
        }),
    }
}

fn number_list(name: &str, value: &str) -> Result<Vec<f64>, SvgError> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| match s.parse::<f64>() {
            Ok(n) if n.is_finite() => Ok(n),
            _ => Err(SvgError::InvalidAttribute {
                name: name.to_string(),
                value: value.to_string(),
            }),
        })
        .collect()
}

/// Canvas size in whole pixels (fractional sizes round up) and the
/// viewBox-to-canvas mapping.
fn canvas(root: &roxmltree::Node<'_, '_>) -> Result<(u32, u32, Affine), SvgError> {
    let view_box = match root.attribute("viewBox") {
        Some(v) => {
            let nums = number_list("viewBox", v)?;
            if nums.len() != 4 || nums[2] <= 0.0 || nums[3] <= 0.0 {
                return Err(SvgError::InvalidAttribute {
                    name: "viewBox".into(),
                    value: v.into(),
                });
            }
            Some([nums[0], nums[1], nums[2], nums[3]])
        }
        None => None,
    };
    let width = root
        .attribute("width")
        .map(|v| parse_length("width", v))
        .transpose()?;
    let height = root
        .attribute("height")
        .map(|v| parse_length("height", v))
        .transpose()?;
    let (w, h) = match (width, height, view_box) {
        (Some(w), Some(h), _) => (w, h),
        (Some(w), None, Some(vb)) => (w, w * vb[3] / vb[2]),
        (None, Some(h), Some(vb)) => (h * vb[2] / vb[3], h),
        (None, None, Some(vb)) => (vb[2], vb[3]),
        _ => return Err(SvgError::MissingCanvas),
    };
    if !(w > 0.0 && h > 0.0 && w <= f64::from(u32::MAX) && h <= f64::from(u32::MAX)) {
        return Err(SvgError::MissingCanvas);
    }
    let view = match view_box {
        Some([x, y, vw, vh]) => {
            let sx = w / vw;
            let sy = h / vh;
            Affine {
                sx,
                sy,
                tx: -x * sx,
                ty: -y * sy,
            }
        }
        None => Affine::IDENTITY,
    };
    Ok((w.ceil() as u32, h.ceil() as u32, view))
}

fn named_color(name: &str) -> Option<Color> {
    Some(match name.to_ascii_lowercase().as_str() {
        "black" => Color::rgb(0, 0, 0),
        "white" => Color::rgb(255, 255, 255),
        "red" => Color::rgb(255, 0, 0),
        "green" => Color::rgb(0, 128, 0),
        "lime" => Color::rgb(0, 255, 0),
        "blue" => Color::rgb(0, 0, 255),
        "yellow" => Color::rgb(255, 255, 0),
        "cyan" | "aqua" => Color::rgb(0, 255, 255),
        "magenta" | "fuchsia" => Color::rgb(255, 0, 255),
        "gray" | "grey" => Color::rgb(128, 128, 128),
        "silver" => Color::rgb(192, 192, 192),
        "maroon" => Color::rgb(128, 0, 0),
        "olive" => Color::rgb(128, 128, 0),
        "navy" => Color::rgb(0, 0, 128),
        "purple" => Color::rgb(128, 0, 128),
        "teal" => Color::rgb(0, 128, 128),
        "orange" => Color::rgb(255, 165, 0),
        _ => return None,
    })
}

fn parse_paint(name: &str, value: &str, inherited: Paint) -> Result<Paint, SvgError> {
    let v = value.trim();
    if v == "none" {
        return Ok(Paint::None);
    }
    if v == "inherit" {
        return Ok(inherited);
    }
    if v.starts_with("url(") {
        return Err(SvgError::UnsupportedFeature(format!(
            "paint server {name}={v}"
        )));
    }
    if v == "currentColor" {
        return Ok(Paint::Color(Color::BLACK));
    }
    if let Some(c) = Color::from_hex(v).or_else(|| named_color(v)) {
        return Ok(Paint::Color(c));
    }
    if let Some(inner) = v.strip_prefix("rgb(").and_then(|s| s.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() == 3 {
            let channel = |s: &str| -> Option<u8> {
                if let Some(pct) = s.strip_suffix('%') {
                    let p: f64 = pct.trim().parse().ok()?;
                    Some((p.clamp(0.0, 100.0) * 2.55).round() as u8)
                } else {
                    let n: f64 = s.parse().ok()?;
                    Some(n.clamp(0.0, 255.0).round() as u8)
                }
            };
            if let (Some(r), Some(g), Some(b)) =
                (channel(parts[0]), channel(parts[1]), channel(parts[2]))
            {
                return Ok(Paint::Color(Color::rgb(r, g, b)));
            }
        }
    }
    Err(SvgError::InvalidAttribute {
        name: name.to_string(),
        value: value.to_string(),
    })
}

fn parse_transform(value: &str) -> Result<Affine, SvgError> {
    let invalid = || SvgError::InvalidAttribute {
        name: "transform".into(),
        value: value.to_string(),
    };
    let mut total = Affine::IDENTITY;
    let mut rest = value.trim();
    while !rest.is_empty() {
        let open = rest.find('(').ok_or_else(invalid)?;
        let close = rest.find(')').ok_or_else(invalid)?;
        if close < open {
            return Err(invalid());
        }
        let name = rest[..open].trim();
        let args = number_list("transform", &rest[open + 1..close])?;
        let step = match (name, args.as_slice()) {
            ("translate", [tx]) => Affine {
                tx: *tx,
                ..Affine::IDENTITY
            },
            ("translate", [tx, ty]) => Affine {
                tx: *tx,
                ty: *ty,
                ..Affine::IDENTITY
            },
            ("scale", [s]) => Affine {
                sx: *s,
                sy: *s,
                ..Affine::IDENTITY
            },
            ("scale", [sx, sy]) => Affine {
                sx: *sx,
                sy: *sy,
                ..Affine::IDENTITY
            },
            ("matrix", [a, b, c, d, e, f]) if *b == 0.0 && *c == 0.0 => Affine {
                sx: *a,
                sy: *d,
                tx: *e,
                ty: *f,
            },
            ("translate" | "scale", _) => return Err(invalid()),
            ("rotate" | "skewX" | "skewY" | "matrix", _) => {
                return Err(SvgError::UnsupportedFeature(format!("transform {name}")))
            }
            _ => return Err(invalid()),
        };
        if step.sx == 0.0 || step.sy == 0.0 {
            return Err(invalid());
        }
        total = total.then_inner(step);
        rest = rest[close + 1..].trim_start_matches(|c: char| c == ',' || c.is_whitespace());
    }
    Ok(total)
}

/// Merges an element's presentation attributes (and simple inline `style`
/// declarations) into the inherited style.
fn apply_presentation(node: &roxmltree::Node<'_, '_>, parent: Style) -> Result<Style, SvgError> {
    for attr in UNSUPPORTED_ATTRIBUTES {
        if node.has_attribute(attr) {
            return Err(SvgError::UnsupportedFeature(format!("{attr} attribute")));
        }
    }
    let mut style = parent;
    let mut declarations: Vec<(String, String)> = Vec::new();
    for name in ["stroke", "fill", "stroke-width"] {
        if let Some(v) = node.attribute(name) {
            declarations.push((name.to_string(), v.to_string()));
        }
    }
    if let Some(inline) = node.attribute("style") {
        for decl in inline.split(';') {
            if let Some((k, v)) = decl.split_once(':') {
                declarations.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
    }
    for (name, value) in declarations {
        match name.as_str() {
            "stroke" => style.stroke = parse_paint("stroke", &value, parent.stroke)?,
            "fill" => style.fill = parse_paint("fill", &value, parent.fill)?,
            "stroke-width" => {
                let w = parse_length("stroke-width", &value)?;
                if w <= 0.0 {
                    return Err(SvgError::InvalidAttribute { name, value });
                }
                style.stroke_width = Some(w);
            }
            "clip-path" | "mask" | "filter" => {
                return Err(SvgError::UnsupportedFeature(format!("{name} style")))
            }
            _ => {}
        }
    }
    if let Some(t) = node.attribute("transform") {
        style.transform = parent.transform.then_inner(parse_transform(t)?);
    }
    Ok(style)
}

fn transform_arc(t: Affine, arc: ArcParams, path_pos: usize) -> Result<ArcParams, SvgError> {
    let (ax, ay) = (t.sx.abs(), t.sy.abs());
    let rot = arc.x_axis_rotation.rem_euclid(180.0);
    let (rx, ry) = if ax == ay {
        (arc.rx * ax, arc.ry * ax)
    } else if rot == 0.0 {
        (arc.rx * ax, arc.ry * ay)
    } else if rot == 90.0 {
        (arc.rx * ay, arc.ry * ax)
    } else {
        return Err(SvgError::UnsupportedFeature(format!(
            "non-uniform scale of a rotated arc (segment {path_pos})"
        )));
    };
    let mirrored = (t.sx < 0.0) != (t.sy < 0.0);
    let x_axis_rotation = if mirrored && ax == ay {
        -arc.x_axis_rotation
    } else {
        arc.x_axis_rotation
    };
    Ok(ArcParams {
        rx,
        ry,
        x_axis_rotation,
        large_arc: arc.large_arc,
        sweep: arc.sweep != mirrored,
    })
}

fn ingest_path(
    node: &roxmltree::Node<'_, '_>,
    style: Style,
    strokes: &mut Vec<Stroke>,
) -> Result<(), SvgError> {
    let d = node.attribute("d").unwrap_or("");
    let segments = parse_path_data(d)?;

    let (color, filled) = match (style.stroke, style.fill) {
        (Paint::Color(c), _) => (c, false),
        (_, Paint::Color(c)) => (c, true),
        (Paint::None, Paint::None) => return Ok(()),
        _ => (Color::BLACK, false),
    };
    let t = style.transform;
    let width = style.stroke_width.unwrap_or(1.0) * (t.sx * t.sy).abs().sqrt();

    let mut current = Point::ORIGIN;
    for (index, seg) in segments.into_iter().enumerate() {
        let geometry = match seg {
            Segment::MoveTo(p) => {
                current = p;
                continue;
            }
            Segment::LineTo(p) => Geometry::Line([t.apply(current), t.apply(p)]),
            Segment::Close(start) => {
                if start == current {
                    continue;
                }
                Geometry::Line([t.apply(current), t.apply(start)])
            }
            Segment::Quadratic(c, p) => {
                Geometry::Quadratic([t.apply(current), t.apply(c), t.apply(p)])
            }
            Segment::Cubic(c1, c2, p) => {
                Geometry::Cubic([t.apply(current), t.apply(c1), t.apply(c2), t.apply(p)])
            }
            Segment::Arc {
                rx,
                ry,
                rotation,
                large_arc,
                sweep,
                to,
            } => {
                if to == current {
                    continue;
                }
                if rx == 0.0 || ry == 0.0 {
                    Geometry::Line([t.apply(current), t.apply(to)])
                } else {
                    let arc = transform_arc(
                        t,
                        ArcParams {
                            rx,
                            ry,
                            x_axis_rotation: rotation,
                            large_arc,
                            sweep,
                        },
                        index,
                    )?;
                    Geometry::EllipticalArc {
                        start: t.apply(current),
                        end: t.apply(to),
                        arc,
                    }
                }
            }
        };
        current = match seg {
            Segment::LineTo(p) | Segment::Quadratic(_, p) | Segment::Cubic(_, _, p) => p,
            Segment::Arc { to, .. } => to,
            Segment::Close(start) => start,
            Segment::MoveTo(p) => p,
        };
        let id = StrokeId(strokes.len() as u32);
        strokes.push(Stroke::new(id, geometry, color, width)?.with_filled(filled));
    }
    Ok(())
}
