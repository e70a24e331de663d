use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use strokeflow::cluster::Dendrogram;
use strokeflow::sequence::{held_karp, nearest_neighbor_tour, two_opt};
use strokeflow::vectorize::{strokes_from_contours, trace_contours};
use strokeflow::{FitParams, Stream};
use strokeflow_bench::{disc_image, random_points};

fn ward(c: &mut Criterion) {
    let mut group = c.benchmark_group("ward");
    for n in [1_000usize, 5_000] {
        let pts = random_points(n, 1024.0, 7);
        group.bench_with_input(BenchmarkId::from_parameter(n), &pts, |b, pts| {
            b.iter(|| Dendrogram::from_anchors(black_box(pts)).unwrap())
        });
    }
    group.finish();
}

fn tsp(c: &mut Criterion) {
    let small = random_points(12, 100.0, 3);
    c.bench_function("held_karp_12", |b| b.iter(|| held_karp(black_box(&small))));
    let large = random_points(500, 1000.0, 3);
    c.bench_function("nn_two_opt_500", |b| {
        b.iter(|| two_opt(&large, &nearest_neighbor_tour(black_box(&large))))
    });
}

fn fitting(c: &mut Criterion) {
    let img = disc_image(256, 40, 11);
    let contours = trace_contours(&img).unwrap();
    let params = FitParams::default();
    c.bench_function("trace_256", |b| {
        b.iter(|| trace_contours(black_box(&img)).unwrap())
    });
    c.bench_function("fit_256", |b| {
        b.iter(|| strokes_from_contours(black_box(&contours), &params, Stream::Paint, 0).unwrap())
    });
}

criterion_group!(benches, ward, tsp, fitting);
criterion_main!(benches);
