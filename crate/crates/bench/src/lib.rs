//! Shared inputs for the benchmarks.

use qfree_core::fixtures::fixture;
use qfree_core::{Gamma, QFreeSet, SampleSet, SplitPoint};

pub fn gamma(name: &str) -> Gamma {
    Gamma::new(fixture(name).expect("known fixture").gamma.expect("fixture has a gamma")).expect("valid gamma")
}

pub fn sampled(name: &str, count: usize) -> QFreeSet {
    let g = gamma(name);
    let samples = SampleSet::with_count(g.m(), count, 0);
    QFreeSet::sampled(g, samples).expect("dimensions agree")
}

/// Deterministic points in `[-2, 2]^(n+m)`.
pub fn points(n: usize, m: usize, count: usize) -> Vec<SplitPoint> {
    (0..count)
        .map(|k| {
            let z: Vec<f64> = (0..n + m).map(|i| 2.0 * ((k * 31 + i * 17) as f64 * 0.618_033_988_75).sin()).collect();
            SplitPoint::from_stacked(&z, n)
        })
        .collect()
}

/// Symmetric `d × d` matrix with entries in `[-1, 1]`.
pub fn symmetric(d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| (0..d).map(|j| ((i.min(j) * 13 + i.max(j) * 7 + 1) as f64).sin()).collect())
        .collect()
}
