//! Points, directions and the membership predicates for `Q`, `Q_beta` and `C_Γ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::Gamma;
use crate::linalg::{dot, norm};
use crate::sphere::SampleSet;

/// Unit-norm tolerance.
pub const TAU_UNIT: f64 = 1e-9;
/// Membership tolerance for `C_Γ`.
pub const TAU_MEMBER: f64 = 1e-7;
/// Isometry band for pair classification.
pub const TAU_ISO: f64 = 1e-7;
/// Minimum LP slack accepted as a certificate.
pub const TAU_CERT: f64 = 1e-4;

/// A point of the unit sphere `D^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        let nrm = norm(&coords);
        if (nrm - 1.0).abs() > TAU_UNIT {
            return Err(Error::NotUnit { norm: nrm });
        }
        Ok(Self(coords))
    }

    /// Rescales `coords` onto the sphere. Fails for the zero vector.
    pub fn normalized(coords: Vec<f64>) -> Result<Self> {
        let nrm = norm(&coords);
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::NotUnit { norm: nrm });
        }
        Ok(Self(coords.into_iter().map(|c| c / nrm).collect()))
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Self(v)
    }

    pub fn from_angle(theta: f64) -> Self {
        Self(vec![theta.cos(), theta.sin()])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Self(coords)
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(v: UnitVector) -> Self {
        v.0
    }
}

impl std::ops::Deref for UnitVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// A point `(x, y)` of `R^n x R^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl SplitPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        Ok(Self { x, y })
    }

    pub fn origin(n: usize, m: usize) -> Self {
        Self { x: vec![0.0; n], y: vec![0.0; m] }
    }

    /// Splits a stacked vector `(x, y)` after the first `n` coordinates.
    pub fn from_stacked(s: &[f64], n: usize) -> Self {
        Self { x: s[..n].to_vec(), y: s[n..].to_vec() }
    }

    pub fn stacked(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn m(&self) -> usize {
        self.y.len()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            x: self.x.iter().map(|v| v * t).collect(),
            y: self.y.iter().map(|v| v * t).collect(),
        }
    }

    /// `self + t * dir` for a stacked direction.
    pub fn offset(&self, dir: &[f64], t: f64) -> Self {
        let n = self.n();
        Self {
            x: self.x.iter().zip(&dir[..n]).map(|(a, d)| a + t * d).collect(),
            y: self.y.iter().zip(&dir[n..]).map(|(a, d)| a + t * d).collect(),
        }
    }
}

/// The inequality `g^T x - b^T y >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceCoeff {
    pub g: UnitVector,
    pub b: UnitVector,
}

impl HalfspaceCoeff {
    pub fn new(g: UnitVector, b: UnitVector) -> Self {
        Self { g, b }
    }

    #[inline]
    pub fn value(&self, p: &SplitPoint) -> f64 {
        dot(&self.g, &p.x) - dot(&self.b, &p.y)
    }

    /// The stacked normal `(g, -b)`.
    pub fn normal(&self) -> Vec<f64> {
        self.g.iter().copied().chain(self.b.iter().map(|v| -v)).collect()
    }
}

/// `‖x‖ <= ‖y‖` up to [`TAU_UNIT`].
pub fn in_q(p: &SplitPoint) -> bool {
    norm(&p.x) <= norm(&p.y) + TAU_UNIT
}

/// `‖x‖ <= beta^T y` up to [`TAU_UNIT`].
pub fn in_q_beta(beta: &UnitVector, p: &SplitPoint) -> Result<bool> {
    if beta.dim() != p.m() {
        return Err(Error::DimensionMismatch { expected: p.m(), got: beta.dim() });
    }
    Ok(norm(&p.x) <= dot(beta, &p.y) + TAU_UNIT)
}

/// How the inequalities of a [`QFreeSet`] are enumerated.
#[derive(Debug, Clone)]
pub enum Strategy {
    /// A finite representation, valid when `C_Γ` is known to be polyhedral.
    ExactIndex(Vec<UnitVector>),
    /// A sphere sample with local refinement of the infimum.
    SampledSphere { samples: SampleSet, refine: Refinement },
}

/// Local search applied after the discrete minimum in [`QFreeSet::margin`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub starts: usize,
    pub iterations: usize,
}

impl Default for Refinement {
    fn default() -> Self {
        Self { starts: 8, iterations: 50 }
    }
}

impl Refinement {
    pub const NONE: Self = Self { starts: 0, iterations: 0 };
}

/// `C_Γ` together with the inequality set used to evaluate it.
#[derive(Debug, Clone)]
pub struct QFreeSet {
    gamma: Gamma,
    strategy: Strategy,
    // (Γ(β), β) for every enumerated β
    rows: Vec<(Vec<f64>, Vec<f64>)>,
}

impl QFreeSet {
    /// Uses a finite index set. The caller asserts `C_Γ` equals the
    /// intersection of these inequalities (polyhedrality).
    pub fn exact(gamma: Gamma, index: Vec<UnitVector>) -> Result<Self> {
        if index.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        let rows = Self::evaluate_rows(&gamma, &index)?;
        Ok(Self { gamma, strategy: Strategy::ExactIndex(index), rows })
    }

    pub fn sampled(gamma: Gamma, samples: SampleSet) -> Result<Self> {
        Self::sampled_with(gamma, samples, Refinement::default())
    }

    pub fn sampled_with(gamma: Gamma, samples: SampleSet, refine: Refinement) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        let rows = Self::evaluate_rows(&gamma, samples.points())?;
        Ok(Self { gamma, strategy: Strategy::SampledSphere { samples, refine }, rows })
    }

    fn evaluate_rows(gamma: &Gamma, betas: &[UnitVector]) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        betas
            .iter()
            .map(|b| Ok((gamma.evaluate(b)?.into(), b.to_vec())))
            .collect()
    }

    pub fn gamma(&self) -> &Gamma {
        &self.gamma
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    pub fn n(&self) -> usize {
        self.gamma.n()
    }

    pub fn m(&self) -> usize {
        self.gamma.m()
    }

    /// The enumerated `(Γ(β), β)` pairs.
    pub fn rows(&self) -> &[(Vec<f64>, Vec<f64>)] {
        &self.rows
    }

    fn check_dims(&self, p: &SplitPoint) -> Result<()> {
        if p.n() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: p.n() });
        }
        if p.m() != self.m() {
            return Err(Error::DimensionMismatch { expected: self.m(), got: p.m() });
        }
        Ok(())
    }

    /// Minimum over the enumerated rows only, with the index attaining it.
    pub fn discrete_margin(&self, p: &SplitPoint) -> Result<(f64, usize)> {
        self.check_dims(p)?;
        let mut best = (f64::INFINITY, 0);
        for (k, (g, b)) in self.rows.iter().enumerate() {
            let v = dot(g, &p.x) - dot(b, &p.y);
            if v < best.0 {
                best = (v, k);
            }
        }
        Ok(best)
    }

    /// `inf_beta Γ(β)^T x - β^T y`: exact for an index set, sampled and
    /// locally refined otherwise.
    pub fn margin(&self, p: &SplitPoint) -> Result<f64> {
        match &self.strategy {
            Strategy::ExactIndex(_) => Ok(self.discrete_margin(p)?.0),
            Strategy::SampledSphere { samples, refine } => {
                self.check_dims(p)?;
                let values: Vec<f64> = self
                    .rows
                    .iter()
                    .map(|(g, b)| dot(g, &p.x) - dot(b, &p.y))
                    .collect();
                let discrete = values.iter().copied().fold(f64::INFINITY, f64::min);
                if refine.starts == 0 || refine.iterations == 0 {
                    return Ok(discrete);
                }
                let objective = |beta: &[f64]| -> Option<f64> {
                    let beta = UnitVector::from_raw(beta.to_vec());
                    let g = self.gamma.evaluate(&beta).ok()?;
                    Some(dot(&g, &p.x) - dot(&beta, &p.y))
                };
                let refined = crate::sphere::refine_minimum(samples, &values, *refine, objective);
                Ok(discrete.min(refined))
            }
        }
    }

    /// `margin(p) >= -TAU_MEMBER`.
    pub fn contains(&self, p: &SplitPoint) -> Result<bool> {
        Ok(self.margin(p)? >= -TAU_MEMBER)
    }
}
