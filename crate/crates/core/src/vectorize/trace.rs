use std::collections::{HashMap, VecDeque};

use super::{Contour, VectorizeError};
use crate::raster::RasterImage;
use crate::stroke::{Color, Point};

pub const MAX_TRACE_COLORS: usize = 64;
/// Regions with fewer pixels are not traced.
pub const MIN_REGION_PIXELS: usize = 4;

/// Clockwise in image coordinates (y down), starting west.
const NEIGHBORS: [(i64, i64); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

fn direction_of(dx: i64, dy: i64) -> usize {
    NEIGHBORS
        .iter()
        .position(|&d| d == (dx, dy))
        .expect("unit offset")
}

/// Most frequent color; ties go to the smallest RGB value.
pub fn background_color(image: &RasterImage) -> Option<Color> {
    let mut counts: HashMap<Color, usize> = HashMap::new();
    for &c in image.pixels() {
        *counts.entry(c).or_default() += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.packed().cmp(&a.0.packed())))
        .map(|(c, _)| c)
}

struct Region {
    label: u32,
    color: Color,
    start: (i64, i64),
}

/// Outer boundaries of every 8-connected region that is not the background
/// color. Each boundary is traced with Moore neighbor tracing and returned
/// as a closed contour through pixel centers, sorted by region color and
/// then by the region's top-left pixel.
pub fn trace_contours(image: &RasterImage) -> Result<Vec<Contour>, VectorizeError> {
    let distinct = {
        let mut seen: Vec<u32> = image.pixels().iter().map(|c| c.packed()).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    };
    if distinct > MAX_TRACE_COLORS {
        return Err(VectorizeError::TooManyColors(distinct));
    }
    let Some(background) = background_color(image) else {
        return Ok(Vec::new());
    };

    let (w, h) = (image.width() as i64, image.height() as i64);
    let idx = |x: i64, y: i64| (y * w + x) as usize;
    let mut labels = vec![u32::MAX; image.pixels().len()];
    let mut regions = Vec::new();
    let mut queue = VecDeque::new();

    for y in 0..h {
        for x in 0..w {
            let color = image.pixels()[idx(x, y)];
            if color == background || labels[idx(x, y)] != u32::MAX {
                continue;
            }
            let label = regions.len() as u32;
            labels[idx(x, y)] = label;
            queue.push_back((x, y));
            let mut size = 0usize;
            while let Some((cx, cy)) = queue.pop_front() {
                size += 1;
                for (dx, dy) in NEIGHBORS {
                    let (nx, ny) = (cx + dx, cy + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    let n = idx(nx, ny);
                    if labels[n] == u32::MAX && image.pixels()[n] == color {
                        labels[n] = label;
                        queue.push_back((nx, ny));
                    }
                }
            }
            regions.push((
                Region {
                    label,
                    color,
                    start: (x, y),
                },
                size,
            ));
        }
    }

    let mut contours: Vec<(Color, (i64, i64), Contour)> = Vec::new();
    for (region, size) in regions {
        if size < MIN_REGION_PIXELS {
            continue;
        }
        let inside = |x: i64, y: i64| {
            x >= 0 && y >= 0 && x < w && y < h && labels[idx(x, y)] == region.label
        };
        let pixels = moore_trace(region.start, size, inside);
        let points = pixels
            .iter()
            .map(|&(x, y)| Point::new(x as f64 + 0.5, y as f64 + 0.5))
            .collect();
        let contour = Contour::new(points, region.color, true)?;
        contours.push((region.color, region.start, contour));
    }
    contours.sort_by_key(|(color, (x, y), _)| (color.packed(), *y, *x));
    Ok(contours.into_iter().map(|(_, _, c)| c).collect())
}

/// Moore neighbor boundary walk from the region's first pixel in raster
/// order, whose west neighbor is necessarily outside. The walk stops when it
/// is about to repeat its first move out of the start pixel, which is the
/// point where the state sequence becomes periodic.
fn moore_trace(
    start: (i64, i64),
    region_size: usize,
    inside: impl Fn(i64, i64) -> bool,
) -> Vec<(i64, i64)> {
    let step = |p: (i64, i64), back: usize| -> Option<((i64, i64), usize)> {
        for i in 1..=8 {
            let d = (back + i) % 8;
            let c = (p.0 + NEIGHBORS[d].0, p.1 + NEIGHBORS[d].1);
            if inside(c.0, c.1) {
                let prev = (back + i + 7) % 8;
                let b = (p.0 + NEIGHBORS[prev].0, p.1 + NEIGHBORS[prev].1);
                return Some((c, direction_of(b.0 - c.0, b.1 - c.1)));
            }
        }
        None
    };

    let mut boundary = vec![start];
    let Some((second, mut back)) = step(start, 0) else {
        return boundary;
    };
    let mut current = second;
    let limit = 8 * region_size + 16;
    while boundary.len() < limit {
        boundary.push(current);
        let (next, next_back) = step(current, back).expect("connected region");
        if current == start && next == second {
            boundary.pop();
            break;
        }
        current = next;
        back = next_back;
    }
    boundary
}

#[cfg(test)]
mod tests {
    use super::*;

    fn squares(rects: &[(u32, u32, u32)], size: u32) -> RasterImage {
        RasterImage::from_fn(size, size, |x, y| {
            let hit = rects
                .iter()
                .any(|&(x0, y0, s)| x >= x0 && x < x0 + s && y >= y0 && y < y0 + s);
            if hit {
                Color::BLACK
            } else {
                Color::WHITE
            }
        })
    }

    /// Pixels of the region with at least one 4-neighbor outside it.
    fn brute_force_boundary(img: &RasterImage, color: Color) -> usize {
        let (w, h) = (img.width() as i64, img.height() as i64);
        let is = |x: i64, y: i64| {
            x >= 0 && y >= 0 && x < w && y < h && img.get(x as u32, y as u32) == color
        };
        let mut n = 0;
        for y in 0..h {
            for x in 0..w {
                if is(x, y)
                    && [(1, 0), (-1, 0), (0, 1), (0, -1)]
                        .iter()
                        .any(|(dx, dy)| !is(x + dx, y + dy))
                {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn centered_square_boundary() {
        let img = squares(&[(5, 5, 10)], 20);
        let contours = trace_contours(&img).unwrap();
        assert_eq!(contours.len(), 1);
        let expected = brute_force_boundary(&img, Color::BLACK);
        assert_eq!(expected, 36);
        assert_eq!(contours[0].points().len(), expected);
        assert!(contours[0].is_closed());
        assert_eq!(contours[0].points()[0], Point::new(5.5, 5.5));
        assert_eq!(contours[0].color(), Color::BLACK);
    }

    #[test]
    fn blank_image_has_no_contours() {
        let img = RasterImage::filled(8, 8, Color::WHITE);
        assert!(trace_contours(&img).unwrap().is_empty());
    }

    #[test]
    fn disjoint_squares_give_two_contours() {
        let img = squares(&[(1, 1, 4), (10, 10, 5)], 20);
        let contours = trace_contours(&img).unwrap();
        assert_eq!(contours.len(), 2);
        assert_eq!(contours[0].points()[0], Point::new(1.5, 1.5));
    }

    #[test]
    fn small_regions_are_dropped() {
        let img = squares(&[(1, 1, 1), (5, 5, 4)], 12);
        assert_eq!(trace_contours(&img).unwrap().len(), 1);
    }

    #[test]
    fn thin_line_walks_out_and_back() {
        let img = RasterImage::from_fn(8, 3, |x, y| {
            if y == 1 && (2..6).contains(&x) {
                Color::BLACK
            } else {
                Color::WHITE
            }
        });
        let contours = trace_contours(&img).unwrap();
        assert_eq!(contours.len(), 1);
        let xs: Vec<f64> = contours[0].points().iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![2.5, 3.5, 4.5, 5.5, 4.5, 3.5]);
    }

    #[test]
    fn too_many_colors() {
        let img = RasterImage::from_fn(65, 1, |x, _| Color::rgb(x as u8, 0, 0));
        assert_eq!(trace_contours(&img), Err(VectorizeError::TooManyColors(65)));
    }

    #[test]
    fn ring_traces_outer_boundary() {
        let img = RasterImage::from_fn(12, 12, |x, y| {
            let border = (2..10).contains(&x) && (2..10).contains(&y);
            let hole = (4..8).contains(&x) && (4..8).contains(&y);
            if border && !hole {
                Color::BLACK
            } else {
                Color::WHITE
            }
        });
        let contours = trace_contours(&img).unwrap();
        assert_eq!(contours.len(), 1);
        assert_eq!(contours[0].points().len(), 28);
    }
}
