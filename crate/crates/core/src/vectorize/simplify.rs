use super::Contour;
use crate::stroke::{distance_to_segment, Point};

/// Douglas-Peucker simplification. Endpoints are kept; for a closed contour
/// the first vertex is kept and the wrap-around edge is part of the
/// polyline. `epsilon == 0` returns the contour unchanged.
pub fn simplify(contour: &Contour, epsilon: f64) -> Contour {
    assert!(epsilon >= 0.0, "epsilon must be non-negative");
    if epsilon == 0.0 {
        return contour.clone();
    }
    let polyline = contour.polyline();
    let mut keep = douglas_peucker(&polyline, epsilon);
    if contour.is_closed() {
        keep.pop();
    }
    Contour {
        points: keep.iter().map(|&i| polyline[i]).collect(),
        color: contour.color(),
        closed: contour.is_closed(),
    }
}

/// Indices of the vertices retained by Douglas-Peucker, ascending. The first
/// and last indices are always present.
pub(crate) fn douglas_peucker(points: &[Point], epsilon: f64) -> Vec<usize> {
    let n = points.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    let mut stack = vec![(0usize, n - 1)];
    while let Some((first, last)) = stack.pop() {
        if last <= first + 1 {
            continue;
        }
        let (a, b) = (points[first], points[last]);
        let (index, dist) = (first + 1..last)
            .map(|i| (i, distance_to_segment(points[i], a, b)))
            .fold(
                (first, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if dist > epsilon {
            keep[index] = true;
            stack.push((first, index));
            stack.push((index, last));
        }
    }
    keep.iter()
        .enumerate()
        .filter_map(|(i, &k)| k.then_some(i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stroke::Color;

    fn open(pts: &[(f64, f64)]) -> Contour {
        Contour::new(
            pts.iter().map(|&(x, y)| Point::new(x, y)).collect(),
            Color::BLACK,
            false,
        )
        .unwrap()
    }

    #[test]
    fn nearly_collinear_collapses() {
        let c = simplify(&open(&[(0., 0.), (5., 0.001), (10., 0.)]), 0.5);
        assert_eq!(c.points(), &[Point::new(0., 0.), Point::new(10., 0.)]);
    }

    #[test]
    fn zero_epsilon_is_identity() {
        let c = open(&[(0., 0.), (5., 0.), (10., 0.)]);
        assert_eq!(simplify(&c, 0.0), c);
    }

    #[test]
    fn square_keeps_its_corners() {
        let mut pts = Vec::new();
        for x in 0..10 {
            pts.push(Point::new(x as f64, 0.0));
        }
        for y in 0..10 {
            pts.push(Point::new(10.0, y as f64));
        }
        for x in (1..=10).rev() {
            pts.push(Point::new(x as f64, 10.0));
        }
        for y in (1..=10).rev() {
            pts.push(Point::new(0.0, y as f64));
        }
        let square = Contour::new(pts, Color::BLACK, true).unwrap();
        let s = simplify(&square, 0.5);
        assert_eq!(
            s.points(),
            &[
                Point::new(0., 0.),
                Point::new(10., 0.),
                Point::new(10., 10.),
                Point::new(0., 10.)
            ]
        );
    }
}
