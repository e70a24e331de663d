//! Seeded inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strokeflow::{Color, Point, RasterImage};

/// `n` uniform points in a `size × size` square.
pub fn random_points(n: usize, size: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Point::new(rng.gen_range(0.0..size), rng.gen_range(0.0..size)))
        .collect()
}

/// White image with `count` filled discs of random color and radius.
pub fn disc_image(size: u32, count: usize, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let discs: Vec<(f64, f64, f64, Color)> = (0..count)
        .map(|_| {
            let r = rng.gen_range(3.0..size as f64 / 12.0);
            let color = Color::rgb(rng.gen(), rng.gen(), rng.gen());
            (
                rng.gen_range(0.0..size as f64),
                rng.gen_range(0.0..size as f64),
                r,
                color,
            )
        })
        .collect();
    RasterImage::from_fn(size, size, |x, y| {
        let (px, py) = (f64::from(x) + 0.5, f64::from(y) + 0.5);
        discs
            .iter()
            .rev()
            .find(|(cx, cy, r, _)| (px - cx).powi(2) + (py - cy).powi(2) <= r * r)
            .map_or(Color::WHITE, |d| d.3)
    })
}
