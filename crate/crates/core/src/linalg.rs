//! Dense helpers on plain `f64` slices.
//!
//! Everything sized by `n + m` is tiny (a handful of coordinates), so vectors
//! stay as `Vec<f64>`; nalgebra is only pulled in for factorizations.

use nalgebra::{DMatrix, DVector};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn axpy(alpha: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| alpha * a + b).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Angle between two unit vectors, clamped against rounding.
pub fn spherical_distance(a: &[f64], b: &[f64]) -> f64 {
    // atan2 form stays accurate for nearly parallel vectors
    let d = dot(a, b);
    let c = norm(&sub(a, b));
    let s = norm(&axpy(1.0, a, b));
    let angle = 2.0 * c.atan2(s);
    if angle.is_finite() {
        angle
    } else {
        d.clamp(-1.0, 1.0).acos()
    }
}

/// Column-major `rows x cols` matrix from column vectors.
pub fn from_columns(cols: &[Vec<f64>], rows: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

pub fn from_rows(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let ncols = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

/// Solve the square system `a x = b` by LU with partial pivoting.
pub fn lu_solve(a: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let lu = a.clone().lu();
    lu.solve(&DVector::from_column_slice(b))
        .map(|x| x.iter().copied().collect())
}

/// Singular values, descending.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Numerical rank with a relative singular-value cutoff.
pub fn rank(a: &DMatrix<f64>, rel_cutoff: f64) -> usize {
    let s = singular_values(a);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_cutoff * top).count()
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Minimum-norm least-squares solution of `a x = b` via the pseudo-inverse,
/// dropping singular values below `cutoff`.
pub fn pinv_solve(a: &DMatrix<f64>, b: &[f64], cutoff: f64) -> Vec<f64> {
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&DVector::from_column_slice(b), cutoff)
        .expect("svd computed with both factors");
    x.iter().copied().collect()
}
