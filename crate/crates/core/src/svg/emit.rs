use std::fmt::Write as _;

use crate::stroke::{CircleArc, Geometry, Point, Stroke, StrokeSet};

/// Shortest decimal form that parses back to the same `f64`. Negative zero
/// prints as `0`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

fn pt(out: &mut String, p: Point) {
    let _ = write!(out, "{} {}", format_number(p.x), format_number(p.y));
}

/// `d` attribute for a single stroke.
pub fn path_data(stroke: &Stroke) -> String {
    let mut d = String::from("M ");
    match stroke.geometry() {
        Geometry::Line([a, b]) => {
            pt(&mut d, *a);
            d.push_str(" L ");
            pt(&mut d, *b);
        }
        Geometry::Quadratic([a, c, b]) => {
            pt(&mut d, *a);
            d.push_str(" Q ");
            pt(&mut d, *c);
            d.push(' ');
            pt(&mut d, *b);
        }
        Geometry::Cubic([a, c1, c2, b]) => {
            pt(&mut d, *a);
            d.push_str(" C ");
            pt(&mut d, *c1);
            d.push(' ');
            pt(&mut d, *c2);
            d.push(' ');
            pt(&mut d, *b);
        }
        Geometry::CircularArc([a, m, b]) => {
            pt(&mut d, *a);
            let arc = CircleArc::from_points(*a, *m, *b).expect("canonical arcs are not collinear");
            let r = format_number(arc.radius);
            let large = u8::from(arc.sweep_angle.abs() > std::f64::consts::PI);
            let sweep = u8::from(arc.sweep_angle > 0.0);
            let _ = write!(d, " A {r} {r} 0 {large} {sweep} ");
            pt(&mut d, *b);
        }
        Geometry::EllipticalArc { start, end, arc } => {
            pt(&mut d, *start);
            let _ = write!(
                d,
                " A {} {} {} {} {} ",
                format_number(arc.rx),
                format_number(arc.ry),
                format_number(arc.x_axis_rotation),
                u8::from(arc.large_arc),
                u8::from(arc.sweep)
            );
            pt(&mut d, *end);
        }
    }
    d
}

fn paint_attributes(stroke: &Stroke) -> String {
    let color = stroke.color().to_hex();
    let width = format_number(stroke.width());
    if stroke.filled() {
        format!(r#"fill="{color}" stroke="none" stroke-width="{width}""#)
    } else {
        format!(r#"fill="none" stroke="{color}" stroke-width="{width}""#)
    }
}

fn header(out: &mut String, width: u32, height: u32) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
}

/// One `path` per stroke, in list order. Re-parsing gives back the same
/// strokes (ids renumbered in document order).
pub fn emit_static_svg(set: &StrokeSet) -> String {
    let mut out = String::new();
    header(&mut out, set.width(), set.height());
    for stroke in set.strokes() {
        let _ = writeln!(
            out,
            r#"  <path d="{}" {} stroke-linecap="round" stroke-linejoin="round"/>"#,
            path_data(stroke),
            paint_attributes(stroke)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn seconds(v: f64) -> String {
    let s = format!("{v:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Animated reveal: stroke `k` fades in at `k · seconds_per_stroke` and stays
/// visible.
///
/// Panics if `seconds_per_stroke` is not a positive finite number.
pub fn emit_animated_svg(
    width: u32,
    height: u32,
    strokes: &[&Stroke],
    seconds_per_stroke: f64,
) -> String {
    assert!(
        seconds_per_stroke.is_finite() && seconds_per_stroke > 0.0,
        "seconds_per_stroke must be positive"
    );
    let mut out = String::new();
    header(&mut out, width, height);
    let dur = seconds(seconds_per_stroke);
    for (k, stroke) in strokes.iter().enumerate() {
        let begin = seconds(k as f64 * seconds_per_stroke);
        let _ = writeln!(
            out,
            r#"  <path d="{}" {} stroke-linecap="round" stroke-linejoin="round" opacity="0"><animate attributeName="opacity" from="0" to="1" begin="{begin}s" dur="{dur}s" fill="freeze"/></path>"#,
            path_data(stroke),
            paint_attributes(stroke)
        );
    }
    out.push_str("</svg>\n");
    out
}
