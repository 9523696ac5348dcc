use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qfree_bench::{gamma, points, sampled};
use qfree_core::{check_nonexpansive, check_origin_exclusion, SampleSet};

fn margin(c: &mut Criterion) {
    let mut group = c.benchmark_group("margin");
    for (name, count) in [("ex1", 4096), ("ex3-amended", 2048)] {
        let set = sampled(name, count);
        let pts = points(set.n(), set.m(), 64);
        group.bench_function(BenchmarkId::new(name, count), |b| {
            b.iter(|| pts.iter().map(|p| set.margin(p).unwrap()).fold(f64::INFINITY, f64::min))
        });
    }
    group.finish();
}

fn nonexpansive(c: &mut Criterion) {
    let mut group = c.benchmark_group("nonexpansive");
    group.sample_size(10);
    let g = gamma("ex1");
    for count in [512, 2048] {
        let samples = SampleSet::angular_grid(count);
        group.bench_function(BenchmarkId::new("ex1", count), |b| b.iter(|| check_nonexpansive(&g, &samples, 0).unwrap()));
    }
    group.finish();
}

fn origin(c: &mut Criterion) {
    let mut group = c.benchmark_group("origin_exclusion");
    group.sample_size(10);
    let g = gamma("ex1");
    for count in [256, 1024] {
        let samples = SampleSet::angular_grid(count);
        group.bench_function(BenchmarkId::new("ex1", count), |b| b.iter(|| check_origin_exclusion(&g, &samples).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, margin, nonexpansive, origin);
criterion_main!(benches);
