//! Homogenization and eigen-scaling of quadratics into `‖x‖ <= ‖y‖`
//! coordinates, and pullback of `C_Γ` inequalities.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::HalfspaceCoeff;
use crate::linalg::dot;

/// Symmetry tolerance for input matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100;
const OFFDIAG_REL: f64 = 1e-12;

/// `s^T A s + g^T s + h <= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemWire", into = "ProblemWire")]
pub struct QuadraticProblem {
    a: DMatrix<f64>,
    g: Vec<f64>,
    h: f64,
}

#[derive(Serialize, Deserialize)]
struct ProblemWire {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(default)]
    g: Option<Vec<f64>>,
    #[serde(default)]
    h: Option<f64>,
}

impl TryFrom<ProblemWire> for QuadraticProblem {
    type Error = Error;
    fn try_from(w: ProblemWire) -> Result<Self> {
        let d = w.a.len();
        let g = w.g.unwrap_or_else(|| vec![0.0; d]);
        QuadraticProblem::new(w.a, g, w.h.unwrap_or(0.0))
    }
}

impl From<QuadraticProblem> for ProblemWire {
    fn from(p: QuadraticProblem) -> Self {
        Self { a: p.a_rows(), g: Some(p.g), h: Some(p.h) }
    }
}

impl QuadraticProblem {
    /// Checks squareness and symmetry, then symmetrizes `A`.
    pub fn new(a: Vec<Vec<f64>>, g: Vec<f64>, h: f64) -> Result<Self> {
        let d = a.len();
        if let Some(r) = a.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: r.len() });
        }
        if g.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: g.len() });
        }
        if a.iter().flatten().chain(&g).chain([&h]).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("quadratic coefficients must be finite".into()));
        }
        let m = DMatrix::from_fn(d, d, |i, j| a[i][j]);
        let asym = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| (m[(i, j)] - m[(j, i)]).abs())
            .fold(0.0, f64::max);
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        let a = (&m + m.transpose()) * 0.5;
        Ok(Self { a, g, h })
    }

    pub fn homogeneous(a: Vec<Vec<f64>>) -> Result<Self> {
        let d = a.len();
        Self::new(a, vec![0.0; d], 0.0)
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn a_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.a.row(i).iter().copied().collect()).collect()
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn is_homogeneous(&self) -> bool {
        self.h == 0.0 && self.g.iter().all(|&v| v == 0.0)
    }

    /// `s^T A s + g^T s + h`.
    pub fn value(&self, s: &[f64]) -> f64 {
        let d = self.dim();
        let mut q = 0.0;
        for i in 0..d {
            let mut row = 0.0;
            for j in 0..d {
                row += self.a[(i, j)] * s[j];
            }
            q += s[i] * row;
        }
        q + dot(&self.g, s) + self.h
    }
}

/// `A' = [[A, g/2], [g^T/2, h]]`, so that `A'` at `(s, 1)` equals the input at `s`.
pub fn homogenize(p: &QuadraticProblem) -> QuadraticProblem {
    let d = p.dim();
    let a = DMatrix::from_fn(d + 1, d + 1, |i, j| match (i < d, j < d) {
        (true, true) => p.a[(i, j)],
        (true, false) => p.g[i] / 2.0,
        (false, true) => p.g[j] / 2.0,
        (false, false) => p.h,
    });
    QuadraticProblem { a, g: vec![0.0; d + 1], h: 0.0 }
}

/// Orthogonal `P` (eigenvectors as columns) and eigenvalues sorted descending.
/// Each eigenvector's first nonzero component is positive.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub vectors: DMatrix<f64>,
    pub values: Vec<f64>,
    pub sweeps: usize,
}

/// Row-cyclic Jacobi rotations.
pub fn eigendecompose(a: &DMatrix<f64>) -> Result<Eigen> {
    let d = a.nrows();
    if a.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: a.ncols() });
    }
    let mut m = a.clone();
    let mut p = DMatrix::<f64>::identity(d, d);
    let scale = a.norm();
    let off = |m: &DMatrix<f64>| {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    s += m[(i, j)] * m[(i, j)];
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&m) > OFFDIAG_REL * scale {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NonConvergence { sweeps });
        }
        sweeps += 1;
        for i in 0..d {
            for j in i + 1..d {
                let apq = m[(i, j)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(j, j)] - m[(i, i)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let (mki, mkj) = (m[(k, i)], m[(k, j)]);
                    m[(k, i)] = c * mki - s * mkj;
                    m[(k, j)] = s * mki + c * mkj;
                }
                for k in 0..d {
                    let (mik, mjk) = (m[(i, k)], m[(j, k)]);
                    m[(i, k)] = c * mik - s * mjk;
                    m[(j, k)] = s * mik + c * mjk;
                }
                for k in 0..d {
                    let (pki, pkj) = (p[(k, i)], p[(k, j)]);
                    p[(k, i)] = c * pki - s * pkj;
                    p[(k, j)] = s * pki + c * pkj;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| m[(y, y)].total_cmp(&m[(x, x)]).then(x.cmp(&y)));
    let values: Vec<f64> = order.iter().map(|&k| m[(k, k)]).collect();
    let mut vectors = DMatrix::from_fn(d, d, |r, c| p[(r, order[c])]);
    for c in 0..d {
        let lead = (0..d).map(|r| vectors[(r, c)]).find(|v| v.abs() > 1e-14).unwrap_or(1.0);
        if lead < 0.0 {
            vectors.column_mut(c).neg_mut();
        }
    }
    Ok(Eigen { vectors, values, sweeps })
}

/// `τ_eig = 1e-9·max(1, ‖A‖_max)`.
pub fn kernel_cutoff(a: &DMatrix<f64>) -> f64 {
    1e-9 * a.amax().max(1.0)
}

/// `(x, y) = T s` with `s^T A s = ‖x‖² - ‖y‖²`. Kernel directions are dropped,
/// so the pulled-back sets contain lines along them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StandardFormMap {
    #[serde(rename = "T")]
    pub t: Vec<Vec<f64>>,
    pub n: usize,
    pub m: usize,
    pub kernel_dim: usize,
    pub eigenvalues: Vec<f64>,
    pub kernel_directions: Vec<Vec<f64>>,
    pub homogenized: bool,
}

impl StandardFormMap {
    /// Dimension of the (possibly homogenized) source space.
    pub fn source_dim(&self) -> usize {
        self.t.first().map_or(0, Vec::len)
    }

    /// `(x, y) = T s`, stacked.
    pub fn apply(&self, s: &[f64]) -> Vec<f64> {
        self.t.iter().map(|r| dot(r, s)).collect()
    }
}

pub fn to_standard_form(p: &QuadraticProblem) -> Result<StandardFormMap> {
    if !p.is_homogeneous() {
        return Err(Error::InvalidSpec("standard form needs g = 0 and h = 0; homogenize first".into()));
    }
    let eig = eigendecompose(&p.a)?;
    let tau = kernel_cutoff(&p.a);
    let d = p.dim();
    let col = |k: usize| -> Vec<f64> { (0..d).map(|r| eig.vectors[(r, k)]).collect() };
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut kernel = Vec::new();
    for (k, &l) in eig.values.iter().enumerate() {
        if l > tau {
            pos.push(col(k).iter().map(|v| v * l.sqrt()).collect::<Vec<_>>());
        } else if l < -tau {
            neg.push(col(k).iter().map(|v| v * (-l).sqrt()).collect::<Vec<_>>());
        } else {
            kernel.push(col(k));
        }
    }
    let (n, m) = (pos.len(), neg.len());
    if n == 0 || m == 0 {
        return Err(Error::NotReducible { n, m });
    }
    pos.extend(neg);
    Ok(StandardFormMap {
        t: pos,
        n,
        m,
        kernel_dim: kernel.len(),
        eigenvalues: eig.values,
        kernel_directions: kernel,
        homogenized: false,
    })
}

/// Homogenizes when asked (or when `g`, `h` are nonzero) and reduces.
pub fn reduce(p: &QuadraticProblem, homogenize_input: bool) -> Result<StandardFormMap> {
    if homogenize_input || !p.is_homogeneous() {
        let mut map = to_standard_form(&homogenize(p))?;
        map.homogenized = true;
        Ok(map)
    } else {
        to_standard_form(p)
    }
}

/// `a^T s >= c` in the original coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearInequality {
    pub a: Vec<f64>,
    pub c: f64,
}

impl LinearInequality {
    pub fn holds(&self, s: &[f64], tol: f64) -> bool {
        dot(&self.a, s) >= self.c - tol
    }
}

/// Pulls `g^T x - b^T y >= 0` back through `T`; with `homogenized` the last
/// coordinate is fixed at `z = 1` and moved to the right-hand side.
pub fn pullback_inequality(map: &StandardFormMap, coeff: &HalfspaceCoeff, homogenized: bool) -> Result<LinearInequality> {
    if coeff.g.dim() != map.n {
        return Err(Error::DimensionMismatch { expected: map.n, got: coeff.g.dim() });
    }
    if coeff.b.dim() != map.m {
        return Err(Error::DimensionMismatch { expected: map.m, got: coeff.b.dim() });
    }
    let w = coeff.normal();
    let d = map.source_dim();
    let mut a: Vec<f64> = (0..d).map(|j| map.t.iter().zip(&w).map(|(r, wi)| r[j] * wi).sum()).collect();
    let c = if homogenized {
        -a.pop().ok_or_else(|| Error::InvalidSpec("empty map".into()))?
    } else {
        0.0
    };
    Ok(LinearInequality { a, c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::UnitVector;
    use approx::assert_abs_diff_eq;

    fn mat(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j])
    }

    #[test]
    fn homogenize_examples() {
        let p = QuadraticProblem::new(vec![vec![1.0]], vec![0.0], -1.0).unwrap();
        assert_eq!(homogenize(&p).a, mat(&[&[1.0, 0.0], &[0.0, -1.0]]));
        let p = QuadraticProblem::new(vec![vec![0.0]], vec![2.0], 0.0).unwrap();
        assert_eq!(homogenize(&p).a, mat(&[&[0.0, 1.0], &[1.0, 0.0]]));
        let p = QuadraticProblem::homogeneous(vec![vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let h = homogenize(&p);
        assert_eq!(h.a, mat(&[&[2.0, 1.0, 0.0], &[1.0, 3.0, 0.0], &[0.0, 0.0, 0.0]]));
    }

    #[test]
    fn jacobi_examples() {
        let e = eigendecompose(&mat(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert_abs_diff_eq!(e.values[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.values[1], -1.0, epsilon = 1e-12);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(e.vectors[(0, 0)], r, epsilon = 1e-12);
        assert_abs_diff_eq!(e.vectors[(1, 0)], r, epsilon = 1e-12);
        assert_abs_diff_eq!(e.vectors[(0, 1)], r, epsilon = 1e-12);
        assert_abs_diff_eq!(e.vectors[(1, 1)], -r, epsilon = 1e-12);

        let e = eigendecompose(&mat(&[&[1.0, 0.0, 0.0], &[0.0, 3.0, 0.0], &[0.0, 0.0, 2.0]])).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.vectors, mat(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]));

        let e = eigendecompose(&DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
        assert_eq!(e.vectors, DMatrix::identity(3, 3));
    }

    #[test]
    fn standard_form_examples() {
        let map = to_standard_form(&QuadraticProblem::homogeneous(vec![vec![2.0, 0.0], vec![0.0, -8.0]]).unwrap()).unwrap();
        assert_eq!((map.n, map.m, map.kernel_dim), (1, 1, 0));
        assert_abs_diff_eq!(map.t[0][0], 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(map.t[1][1], 8f64.sqrt(), epsilon = 1e-15);

        let err = to_standard_form(&QuadraticProblem::homogeneous(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap());
        assert!(matches!(err, Err(Error::NotReducible { n: 2, m: 0 })));

        let map = to_standard_form(
            &QuadraticProblem::homogeneous(vec![vec![1.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap(),
        )
        .unwrap();
        assert_eq!(map.kernel_dim, 1);
        assert!(map.t.iter().all(|r| r[2] == 0.0));
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let err = QuadraticProblem::homogeneous(vec![vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!(matches!(err, Err(Error::NotSymmetric { .. })));
        assert!(QuadraticProblem::homogeneous(vec![vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn pullback_examples() {
        // identity map
        let map = to_standard_form(&QuadraticProblem::homogeneous(vec![vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap()).unwrap();
        let coeff = HalfspaceCoeff::new(UnitVector::new(vec![1.0]).unwrap(), UnitVector::new(vec![-1.0]).unwrap());
        let ineq = pullback_inequality(&map, &coeff, false).unwrap();
        assert_eq!(ineq, LinearInequality { a: vec![1.0, 1.0], c: 0.0 });

        // s² <= 1 homogenized: coefficient (1, -1) gives s >= -1
        let p = QuadraticProblem::new(vec![vec![1.0]], vec![0.0], -1.0).unwrap();
        let map = reduce(&p, true).unwrap();
        assert!(map.homogenized);
        let ineq = pullback_inequality(&map, &coeff, true).unwrap();
        assert_eq!(ineq, LinearInequality { a: vec![1.0], c: -1.0 });
        let up = HalfspaceCoeff::new(UnitVector::new(vec![1.0]).unwrap(), UnitVector::new(vec![1.0]).unwrap());
        assert_eq!(pullback_inequality(&map, &up, true).unwrap(), LinearInequality { a: vec![1.0], c: 1.0 });

        let wrong = HalfspaceCoeff::new(UnitVector::new(vec![1.0, 0.0]).unwrap(), UnitVector::new(vec![1.0]).unwrap());
        assert!(pullback_inequality(&map, &wrong, true).is_err());
    }

    #[test]
    fn problem_json_defaults() {
        let p: QuadraticProblem = serde_json::from_str(r#"{"A": [[1, 0], [0, -1]]}"#).unwrap();
        assert!(p.is_homogeneous());
        let p: QuadraticProblem = serde_json::from_str(r#"{"A": [[1]], "g": [0], "h": -1}"#).unwrap();
        assert_eq!(p.h(), -1.0);
        assert!(serde_json::from_str::<QuadraticProblem>(r#"{"A": [[1, 1], [0, 1]]}"#).is_err());
    }
}
