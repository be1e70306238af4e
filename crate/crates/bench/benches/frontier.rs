use std::hint::black_box;

use avfrontier::frontier::{
    convex_hull_frontier, fit_frontier, headroom_report, pareto_set, Axis, FrontierConfig, HeadroomMode,
};
use avfrontier_bench::{concave_surface, uniform_points};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn bench_pareto(c: &mut Criterion) {
    let mut group = c.benchmark_group("pareto_set");
    for n in [1_000, 10_000, 100_000] {
        let pts = uniform_points(n, 1);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &pts, |b, pts| b.iter(|| pareto_set(black_box(pts))));
    }
    group.finish();
}

fn bench_fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit_frontier");
    group.sample_size(10);
    for n in [60, 150, 300] {
        let pts = concave_surface(n, 0.01, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &pts, |b, pts| {
            b.iter(|| fit_frontier(black_box(pts), &FrontierConfig::default()).unwrap())
        });
    }
    group.finish();
}

fn bench_headroom(c: &mut Criterion) {
    let model = fit_frontier(&concave_surface(200, 0.01, 3), &FrontierConfig::default()).unwrap();
    let surface = model.surface_points();
    let mut group = c.benchmark_group("headroom_surface");
    for n in [1_000, 10_000] {
        let pts = uniform_points(n, 4);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &pts, |b, pts| {
            b.iter(|| headroom_report(black_box(pts), &surface, HeadroomMode::Surface))
        });
    }
    group.finish();
}

fn bench_hull(c: &mut Criterion) {
    let pts = concave_surface(500, 0.0, 5);
    c.bench_function("convex_hull_frontier/500", |b| b.iter(|| convex_hull_frontier(black_box(&pts), Axis::I)));
}

criterion_group!(benches, bench_pareto, bench_fit, bench_headroom, bench_hull);
criterion_main!(benches);
