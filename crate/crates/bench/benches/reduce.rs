use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;

use qfree_bench::symmetric;
use qfree_core::reduction::eigendecompose;
use qfree_core::{reduce, QuadraticProblem};

fn jacobi(c: &mut Criterion) {
    let mut group = c.benchmark_group("jacobi");
    for d in [4, 16, 48] {
        let rows = symmetric(d);
        let a = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        group.bench_function(BenchmarkId::from_parameter(d), |b| b.iter(|| eigendecompose(&a).unwrap()));
    }
    group.finish();
}

fn standard_form(c: &mut Criterion) {
    let d = 16;
    let p = QuadraticProblem::new(symmetric(d), vec![0.5; d], -1.0).unwrap();
    c.bench_function("reduce/homogenized_16", |b| b.iter(|| reduce(&p, true).unwrap()));
}

criterion_group!(benches, jacobi, standard_form);
criterion_main!(benches);
