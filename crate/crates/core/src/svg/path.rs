//! SVG path data (`d` attribute) grammar.
//!
//! Produces absolute segments: relative commands are resolved, `H`/`V`
//! become lines, and the `S`/`T` shorthands are expanded with the reflection
//! rule.

use crate::stroke::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct PathDataError {
    /// Byte offset into the path data.
    pub position: usize,
    pub message: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    MoveTo(Point),
    LineTo(Point),
    Quadratic(Point, Point),
    Cubic(Point, Point, Point),
    Arc {
        rx: f64,
        ry: f64,
        rotation: f64,
        large_arc: bool,
        sweep: bool,
        to: Point,
    },
    /// Closes the subpath back to the given start point.
    Close(Point),
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn err(&self, message: &'static str) -> PathDataError {
        PathDataError {
            position: self.pos,
            message,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len()
            && matches!(self.bytes[self.pos], b' ' | b'\t' | b'\n' | b'\r' | 0x0c)
        {
            self.pos += 1;
        }
    }

    fn skip_ws_comma(&mut self) {
        self.skip_ws();
        if self.peek() == Some(b',') {
            self.pos += 1;
            self.skip_ws();
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn at_number(&self) -> bool {
        matches!(self.peek(), Some(b'0'..=b'9' | b'.' | b'-' | b'+'))
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        self.pos - start
    }

    fn number(&mut self) -> Result<f64, PathDataError> {
        self.skip_ws_comma();
        let start = self.pos;
        if matches!(self.peek(), Some(b'+' | b'-')) {
            self.pos += 1;
        }
        let int_digits = self.digits();
        let mut frac_digits = 0;
        if self.peek() == Some(b'.') {
            self.pos += 1;
            frac_digits = self.digits();
        }
        if int_digits + frac_digits == 0 {
            self.pos = start;
            return Err(self.err("expected a number"));
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii");
        let value: f64 = text.parse().map_err(|_| PathDataError {
            position: start,
            message: "invalid number",
        })?;
        if !value.is_finite() {
            return Err(PathDataError {
                position: start,
                message: "number out of range",
            });
        }
        Ok(value)
    }

    fn flag(&mut self) -> Result<bool, PathDataError> {
        self.skip_ws_comma();
        match self.peek() {
            Some(b'0') => {
                self.pos += 1;
                Ok(false)
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(true)
            }
            _ => Err(self.err("expected an arc flag (0 or 1)")),
        }
    }

    fn pair(&mut self) -> Result<Point, PathDataError> {
        let x = self.number()?;
        let y = self.number()?;
        Ok(Point::new(x, y))
    }
}

/// Parses path data into absolute segments.
pub fn parse_path_data(d: &str) -> Result<Vec<Segment>, PathDataError> {
    let mut cur = Cursor {
        bytes: d.as_bytes(),
        pos: 0,
    };
    let mut out = Vec::new();
    let mut current = Point::ORIGIN;
    let mut subpath_start = Point::ORIGIN;
    // Last cubic second control point / last quadratic control point, for
    // the S and T reflections.
    let mut last_cubic_ctrl: Option<Point> = None;
    let mut last_quad_ctrl: Option<Point> = None;
    let mut command: Option<u8> = None;

    loop {
        cur.skip_ws();
        let Some(c) = cur.peek() else { break };
        let cmd = if c.is_ascii_alphabetic() {
            cur.pos += 1;
            c
        } else if cur.at_number() || c == b',' {
            match command {
                Some(b'M') => b'L',
                Some(b'm') => b'l',
                Some(b'Z' | b'z') | None => return Err(cur.err("expected a command")),
                Some(prev) => prev,
            }
        } else {
            return Err(cur.err("unexpected character"));
        };
        if command.is_none() && !matches!(cmd, b'M' | b'm') {
            return Err(PathDataError {
                position: cur.pos.saturating_sub(1),
                message: "path data must start with a moveto",
            });
        }
        let relative = cmd.is_ascii_lowercase();
        let base = if relative { current } else { Point::ORIGIN };
        let abs = |p: Point| if relative { p + base } else { p };

        let mut cubic_ctrl = None;
        let mut quad_ctrl = None;
        match cmd.to_ascii_uppercase() {
            b'M' => {
                let p = abs(cur.pair()?);
                out.push(Segment::MoveTo(p));
                current = p;
                subpath_start = p;
            }
            b'L' => {
                let p = abs(cur.pair()?);
                out.push(Segment::LineTo(p));
                current = p;
            }
            b'H' => {
                let x = cur.number()?;
                let p = Point::new(if relative { current.x + x } else { x }, current.y);
                out.push(Segment::LineTo(p));
                current = p;
            }
            b'V' => {
                let y = cur.number()?;
                let p = Point::new(current.x, if relative { current.y + y } else { y });
                out.push(Segment::LineTo(p));
                current = p;
            }
            b'C' => {
                let c1 = abs(cur.pair()?);
                let c2 = abs(cur.pair()?);
                let p = abs(cur.pair()?);
                out.push(Segment::Cubic(c1, c2, p));
                cubic_ctrl = Some(c2);
                current = p;
            }
            b'S' => {
                let c1 = match last_cubic_ctrl {
                    Some(c) => current * 2.0 - c,
                    None => current,
                };
                let c2 = abs(cur.pair()?);
                let p = abs(cur.pair()?);
                out.push(Segment::Cubic(c1, c2, p));
                cubic_ctrl = Some(c2);
                current = p;
            }
            b'Q' => {
                let c1 = abs(cur.pair()?);
                let p = abs(cur.pair()?);
                out.push(Segment::Quadratic(c1, p));
                quad_ctrl = Some(c1);
                current = p;
            }
            b'T' => {
                let c1 = match last_quad_ctrl {
                    Some(c) => current * 2.0 - c,
                    None => current,
                };
                let p = abs(cur.pair()?);
                out.push(Segment::Quadratic(c1, p));
                quad_ctrl = Some(c1);
                current = p;
            }
            b'A' => {
                let rx = cur.number()?;
                let ry = cur.number()?;
                let rotation = cur.number()?;
                let large_arc = cur.flag()?;
                let sweep = cur.flag()?;
                let p = abs(cur.pair()?);
                out.push(Segment::Arc {
                    rx: rx.abs(),
                    ry: ry.abs(),
                    rotation,
                    large_arc,
                    sweep,
                    to: p,
                });
                current = p;
            }
            b'Z' => {
                out.push(Segment::Close(subpath_start));
                current = subpath_start;
            }
            _ => {
                return Err(PathDataError {
                    position: cur.pos - 1,
                    message: "unknown command",
                })
            }
        }
        last_cubic_ctrl = cubic_ctrl;
        last_quad_ctrl = quad_ctrl;
        command = Some(cmd);
        cur.skip_ws_comma();
    }
    Ok(out)
}
