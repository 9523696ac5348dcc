//! Deterministic sample sets on the unit sphere `D^m` and local refinement of
//! minima found on them.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::geometry::{Refinement, UnitVector};
use crate::linalg::{dot, norm};

/// Default grid size on the circle.
pub const CIRCLE_POINTS: usize = 4096;
/// Default count for each of the low-discrepancy and random parts when `m >= 3`.
pub const SCATTERED_POINTS: usize = 8192;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "layout", rename_all = "snake_case")]
pub enum SampleLayout {
    /// `D^1 = {+1, -1}`, enumerated exactly.
    Antipodal,
    /// `theta_k = 2 pi k / count`.
    AngularGrid { count: usize },
    /// Low-discrepancy points followed by seeded pseudo-random ones.
    Scattered { low_discrepancy: usize, random: usize, seed: u64 },
    /// Caller-provided points.
    Custom { count: usize },
}

#[derive(Debug, Clone)]
pub struct SampleSet {
    dim: usize,
    points: Vec<UnitVector>,
    layout: SampleLayout,
}

impl SampleSet {
    /// The default sample for `D^m`: exact for `m = 1`, a 4096-point grid for
    /// `m = 2`, and 8192 low-discrepancy plus 8192 random points otherwise.
    pub fn default_for(m: usize, seed: u64) -> Self {
        match m {
            1 => Self::antipodal(),
            2 => Self::angular_grid(CIRCLE_POINTS),
            _ => Self::scattered(m, SCATTERED_POINTS, SCATTERED_POINTS, seed),
        }
    }

    /// Like [`SampleSet::default_for`] with `count` replacing the default sizes.
    pub fn with_count(m: usize, count: usize, seed: u64) -> Self {
        match m {
            1 => Self::antipodal(),
            2 => Self::angular_grid(count),
            _ => Self::scattered(m, count, count, seed),
        }
    }

    pub fn antipodal() -> Self {
        Self {
            dim: 1,
            points: vec![UnitVector::from_raw(vec![1.0]), UnitVector::from_raw(vec![-1.0])],
            layout: SampleLayout::Antipodal,
        }
    }

    pub fn angular_grid(count: usize) -> Self {
        let points = (0..count)
            .map(|k| UnitVector::from_angle(2.0 * PI * k as f64 / count as f64))
            .collect();
        Self { dim: 2, points, layout: SampleLayout::AngularGrid { count } }
    }

    pub fn scattered(m: usize, low_discrepancy: usize, random: usize, seed: u64) -> Self {
        assert!(m >= 1, "sphere dimension must be positive");
        let mut points = low_discrepancy_points(m, low_discrepancy);
        points.extend(random_points(m, random, seed));
        Self {
            dim: m,
            points,
            layout: SampleLayout::Scattered { low_discrepancy, random, seed },
        }
    }

    pub fn from_points(points: Vec<UnitVector>) -> Self {
        let dim = points.first().map_or(0, UnitVector::dim);
        let count = points.len();
        Self { dim, points, layout: SampleLayout::Custom { count } }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[UnitVector] {
        &self.points
    }

    pub fn layout(&self) -> &SampleLayout {
        &self.layout
    }

    /// Typical distance between neighbouring samples.
    pub fn spacing(&self) -> f64 {
        match self.layout {
            SampleLayout::Antipodal => PI,
            SampleLayout::AngularGrid { count } => 2.0 * PI / count as f64,
            _ => {
                let k = self.dim.saturating_sub(1).max(1);
                (sphere_area(self.dim) / self.len().max(1) as f64).powf(1.0 / k as f64)
            }
        }
    }

    /// Seeded random index pairs `(i, j)` with `i != j`.
    pub fn random_pairs(&self, count: usize, seed: u64) -> Vec<(usize, usize)> {
        let n = self.len();
        if n < 2 {
            return Vec::new();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        (0..count)
            .map(|_| {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                (i, j)
            })
            .collect()
    }
}

/// Surface area of the unit sphere in `R^m`.
fn sphere_area(m: usize) -> f64 {
    match m {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 2.0) * sphere_area(m - 2),
    }
}

fn low_discrepancy_points(m: usize, count: usize) -> Vec<UnitVector> {
    match m {
        1 => (0..count)
            .map(|k| UnitVector::from_raw(vec![if k % 2 == 0 { 1.0 } else { -1.0 }]))
            .collect(),
        2 => SampleSet::angular_grid(count).points,
        3 => {
            // spherical Fibonacci lattice
            let golden_angle = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden_angle * k as f64;
                    UnitVector::from_raw(vec![r * phi.cos(), r * phi.sin(), z])
                })
                .collect()
        }
        _ => {
            // Halton points pushed through Box-Muller, then normalized
            let pairs = m.div_ceil(2);
            let bases = first_primes(2 * pairs);
            (1..=count)
                .filter_map(|k| {
                    let mut g = Vec::with_capacity(2 * pairs);
                    for p in 0..pairs {
                        let u1 = radical_inverse(k, bases[2 * p]);
                        let u2 = radical_inverse(k, bases[2 * p + 1]);
                        let r = (-2.0 * u1.ln()).sqrt();
                        g.push(r * (2.0 * PI * u2).cos());
                        g.push(r * (2.0 * PI * u2).sin());
                    }
                    g.truncate(m);
                    UnitVector::normalized(g).ok()
                })
                .collect()
        }
    }
}

fn random_points(m: usize, count: usize, seed: u64) -> Vec<UnitVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let g: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(u) = UnitVector::normalized(g) {
            out.push(u);
        }
    }
    out
}

fn radical_inverse(mut k: usize, base: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while k > 0 {
        r += f * (k % base) as f64;
        k /= base;
        f *= inv;
    }
    r
}

fn first_primes(count: usize) -> Vec<usize> {
    let mut primes = Vec::with_capacity(count);
    let mut c = 2;
    while primes.len() < count {
        if primes.iter().all(|p| c % p != 0) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

/// Orthonormal basis of the tangent space at `beta`.
pub(crate) fn tangent_basis(beta: &[f64]) -> Vec<Vec<f64>> {
    let m = beta.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m.saturating_sub(1));
    for i in 0..m {
        let mut v = vec![0.0; m];
        v[i] = 1.0;
        let c = dot(&v, beta);
        for (vk, bk) in v.iter_mut().zip(beta) {
            *vk -= c * bk;
        }
        for u in &basis {
            let c = dot(&v, u);
            for (vk, uk) in v.iter_mut().zip(u) {
                *vk -= c * uk;
            }
        }
        let nrm = norm(&v);
        if nrm > 1e-6 {
            basis.push(v.into_iter().map(|x| x / nrm).collect());
        }
        if basis.len() + 1 == m {
            break;
        }
    }
    basis
}

fn retract(beta: &[f64], dir: &[f64], t: f64) -> Vec<f64> {
    let v: Vec<f64> = beta.iter().zip(dir).map(|(b, d)| b + t * d).collect();
    let nrm = norm(&v);
    v.into_iter().map(|x| x / nrm).collect()
}

/// Local refinement of `min_beta objective(beta)` seeded from the sampled
/// `values` (one per sample point). `objective` returns `None` where it cannot
/// be evaluated. Returns the smallest value found (never more than the best
/// seed).
pub fn refine_minimum<F>(samples: &SampleSet, values: &[f64], refine: Refinement, objective: F) -> f64
where
    F: Fn(&[f64]) -> Option<f64>,
{
    let f = |b: &[f64]| objective(b).unwrap_or(f64::INFINITY);
    let seeds = seed_indices(samples, values, refine.starts);
    let mut best = seeds.iter().map(|&k| values[k]).fold(f64::INFINITY, f64::min);
    match samples.layout {
        SampleLayout::Antipodal => {}
        SampleLayout::AngularGrid { count } => {
            let h = 2.0 * PI / count as f64;
            for &k in &seeds {
                let theta = 2.0 * PI * k as f64 / count as f64;
                let value = golden_section(
                    |t| f(&[t.cos(), t.sin()]),
                    theta - h,
                    theta + h,
                    refine.iterations,
                );
                best = best.min(value);
            }
        }
        _ => {
            let h0 = samples.spacing();
            for &k in &seeds {
                best = best.min(descend(&f, samples.points[k].as_slice(), values[k], h0, refine.iterations));
            }
        }
    }
    best
}

fn seed_indices(samples: &SampleSet, values: &[f64], starts: usize) -> Vec<usize> {
    let n = values.len();
    let mut candidates: Vec<usize> = match samples.layout {
        // distinct basins: discrete local minima on the circle
        SampleLayout::AngularGrid { .. } if n >= 3 => (0..n)
            .filter(|&k| {
                let prev = values[(k + n - 1) % n];
                let next = values[(k + 1) % n];
                values[k] <= prev && values[k] <= next
            })
            .collect(),
        _ => (0..n).collect(),
    };
    let order = |&a: &usize, &b: &usize| values[a].total_cmp(&values[b]).then(a.cmp(&b));
    if starts < candidates.len() {
        candidates.select_nth_unstable_by(starts, order);
        candidates.truncate(starts);
    }
    candidates.sort_by(order);
    candidates
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iterations: usize) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = fc.min(fd).min(f(a)).min(f(b));
    for _ in 0..iterations {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
            best = best.min(fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
            best = best.min(fd);
        }
    }
    best
}

/// Projected descent with central finite-difference gradients in the tangent
/// space and an adaptive step.
fn descend<F: Fn(&[f64]) -> f64>(f: &F, start: &[f64], start_value: f64, step0: f64, iterations: usize) -> f64 {
    const FD: f64 = 1e-7;
    let mut beta = start.to_vec();
    let mut value = start_value;
    let mut step = step0;
    for _ in 0..iterations {
        let basis = tangent_basis(&beta);
        let mut grad = vec![0.0; beta.len()];
        for u in &basis {
            let gp = f(&retract(&beta, u, FD));
            let gm = f(&retract(&beta, u, -FD));
            if !gp.is_finite() || !gm.is_finite() {
                continue;
            }
            let slope = (gp - gm) / (2.0 * FD);
            for (g, uk) in grad.iter_mut().zip(u) {
                *g -= slope * uk;
            }
        }
        let gnorm = norm(&grad);
        if gnorm < 1e-14 {
            break;
        }
        let dir: Vec<f64> = grad.iter().map(|g| g / gnorm).collect();
        let trial = retract(&beta, &dir, step);
        let tv = f(&trial);
        if tv < value {
            beta = trial;
            value = tv;
            step *= 1.5;
        } else {
            step *= 0.5;
            if step < 1e-13 {
                break;
            }
        }
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sizes() {
        assert_eq!(SampleSet::default_for(1, 0).len(), 2);
        assert_eq!(SampleSet::default_for(2, 0).len(), 4096);
        let s = SampleSet::default_for(3, 7);
        assert_eq!(s.len(), 16384);
        assert!(s.points().iter().all(|p| (norm(p) - 1.0).abs() < 1e-12));
        let s = SampleSet::default_for(5, 7);
        assert_eq!(s.len(), 16384);
        assert!(s.points().iter().all(|p| p.dim() == 5 && (norm(p) - 1.0).abs() < 1e-12));
    }

    #[test]
    fn seeded_sets_are_reproducible() {
        let a = SampleSet::scattered(4, 10, 10, 3);
        let b = SampleSet::scattered(4, 10, 10, 3);
        let c = SampleSet::scattered(4, 10, 10, 4);
        assert_eq!(a.points(), b.points());
        assert_ne!(a.points(), c.points());
    }

    #[test]
    fn fibonacci_lattice_covers_the_sphere() {
        let s = SampleSet::scattered(3, 2000, 0, 0);
        // every probe direction has a sample within a few spacings
        let probes = random_points(3, 200, 11);
        let h = s.spacing();
        for p in &probes {
            let best = s
                .points()
                .iter()
                .map(|q| crate::linalg::spherical_distance(p, q))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 2.0 * h, "gap {best} vs spacing {h}");
        }
    }

    #[test]
    fn refinement_finds_off_grid_minimum() {
        let s = SampleSet::angular_grid(64);
        let target = 0.123_f64;
        let obj = |b: &[f64]| Some(-(b[0] * target.cos() + b[1] * target.sin()));
        let values: Vec<f64> = s.points().iter().map(|p| obj(p).unwrap()).collect();
        let discrete = values.iter().copied().fold(f64::INFINITY, f64::min);
        let refined = refine_minimum(&s, &values, Refinement::default(), obj);
        assert!(discrete > -1.0 + 1e-4);
        assert!((refined + 1.0).abs() < 1e-14);
    }

    #[test]
    fn descent_on_two_sphere() {
        let s = SampleSet::scattered(3, 200, 0, 0);
        let target = UnitVector::normalized(vec![0.3, -0.2, 0.9]).unwrap();
        let obj = |b: &[f64]| Some(-dot(b, &target));
        let values: Vec<f64> = s.points().iter().map(|p| obj(p).unwrap()).collect();
        let refined = refine_minimum(&s, &values, Refinement::default(), obj);
        assert!((refined + 1.0).abs() < 1e-9, "{refined}");
    }

    #[test]
    fn tangent_basis_is_orthonormal() {
        let b = UnitVector::normalized(vec![1.0, 2.0, -2.0, 0.5]).unwrap();
        let t = tangent_basis(&b);
        assert_eq!(t.len(), 3);
        for (i, u) in t.iter().enumerate() {
            assert!(dot(u, &b).abs() < 1e-12);
            for (j, v) in t.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(u, v) - expect).abs() < 1e-12);
            }
        }
    }
}
