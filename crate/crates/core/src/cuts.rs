//! Intersection cuts from `C_Γ` over a simplicial cone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{in_q, QFreeSet, SplitPoint, Strategy, TAU_CERT, TAU_MEMBER};
use crate::linalg::{condition_number, dot, from_columns, lu_solve, norm};
use crate::sphere::SampleLayout;

pub const MAX_CONDITION: f64 = 1e10;
/// Sampled step lengths are rounded down by this relative amount.
pub const STEP_BACKOFF: f64 = 1e-9;
/// Points may violate an emitted cut by at most this much.
pub const CUT_TOL: f64 = 1e-8;
const BISECTION_STEPS: usize = 200;

/// An apex and `n + m` linearly independent rays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimplicialCone {
    pub apex: SplitPoint,
    pub rays: Vec<Vec<f64>>,
}

impl SimplicialCone {
    /// Checks ray count, dimensions and conditioning; apex interiority is
    /// checked against a set in [`build_cut`].
    pub fn new(apex: SplitPoint, rays: Vec<Vec<f64>>) -> Result<Self> {
        let cone = Self { apex, rays };
        cone.validate()?;
        Ok(cone)
    }

    pub fn dim(&self) -> usize {
        self.apex.n() + self.apex.m()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if self.rays.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.rays.len() });
        }
        if let Some(r) = self.rays.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: r.len() });
        }
        let condition = condition_number(&from_columns(&self.rays, d));
        if !(condition <= MAX_CONDITION) {
            return Err(Error::BadRays { condition });
        }
        Ok(())
    }

    /// `apex + Σ λ_j r_j`.
    pub fn point(&self, lambda: &[f64]) -> SplitPoint {
        let mut s = self.apex.stacked();
        for (r, l) in self.rays.iter().zip(lambda) {
            for (si, ri) in s.iter_mut().zip(r) {
                *si += l * ri;
            }
        }
        SplitPoint::from_stacked(&s, self.apex.n())
    }
}

/// `pi^T s >= pi0` with `‖pi‖ = 1`; `steps` are the per-ray step lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionCut {
    pub pi: Vec<f64>,
    pub pi0: f64,
    #[serde(with = "extended")]
    pub steps: Vec<f64>,
}

impl IntersectionCut {
    /// `pi^T s - pi0`.
    pub fn slack(&self, p: &SplitPoint) -> f64 {
        dot(&self.pi, &p.stacked()) - self.pi0
    }
}

/// Non-finite steps as the string `"inf"`.
mod extended {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Step {
        Finite(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|&t| if t.is_finite() { Step::Finite(t) } else { Step::Text("inf".into()) })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Step>::deserialize(d)?
            .into_iter()
            .map(|s| match s {
                Step::Finite(t) => Ok(t),
                Step::Text(t) if t == "inf" => Ok(f64::INFINITY),
                Step::Text(t) => Err(D::Error::custom(format!("bad step {t:?}"))),
            })
            .collect()
    }
}

fn check_dims(c: &QFreeSet, p: &SplitPoint, ray: &[f64]) -> Result<()> {
    let d = c.n() + c.m();
    if p.n() != c.n() || p.m() != c.m() {
        return Err(Error::DimensionMismatch { expected: d, got: p.n() + p.m() });
    }
    if ray.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: ray.len() });
    }
    Ok(())
}

/// `min_β f_β / (-f'_β)` over enumerated rows with `f'_β < 0`.
fn ratio_min(c: &QFreeSet, apex: &SplitPoint, ray: &[f64]) -> f64 {
    let n = c.n();
    let (rx, ry) = ray.split_at(n);
    c.rows()
        .iter()
        .filter_map(|(g, b)| {
            let f = dot(g, &apex.x) - dot(b, &apex.y);
            let df = dot(g, rx) - dot(b, ry);
            (df < 0.0).then(|| f / -df)
        })
        .fold(f64::INFINITY, f64::min)
}

/// `sup{t >= 0 : margin(C, apex + t·ray) >= 0}`. Exact for an index set; for
/// a sampled set the coarse ratio is tightened by bisection on the refined
/// margin and then rounded down.
pub fn step_length(c: &QFreeSet, apex: &SplitPoint, ray: &[f64]) -> Result<f64> {
    check_dims(c, apex, ray)?;
    let margin = c.margin(apex)?;
    if !(margin > TAU_MEMBER) {
        return Err(Error::ApexNotInterior { margin });
    }
    let coarse = ratio_min(c, apex, ray);
    let exhaustive = match c.strategy() {
        Strategy::ExactIndex(_) => true,
        // D¹ = {±1} is enumerated completely
        Strategy::SampledSphere { samples, .. } => matches!(samples.layout(), SampleLayout::Antipodal),
    };
    if !coarse.is_finite() || exhaustive {
        return Ok(coarse);
    }
    let at = |t: f64| c.margin(&apex.offset(ray, t));
    if at(coarse)? >= 0.0 {
        return Ok(coarse * (1.0 - STEP_BACKOFF));
    }
    let (mut lo, mut hi) = (0.0, coarse);
    for _ in 0..BISECTION_STEPS {
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if at(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo - STEP_BACKOFF * lo.max(1.0)).max(0.0))
}

/// `Σ λ_j / t_j >= 1` mapped to `s` through `λ = R^{-1}(s - apex)`, normalized.
pub fn build_cut(c: &QFreeSet, cone: &SimplicialCone) -> Result<IntersectionCut> {
    cone.validate()?;
    let steps = cone.rays.iter().map(|r| step_length(c, &cone.apex, r)).collect::<Result<Vec<_>>>()?;
    cut_from_steps(cone, steps)
}

/// Assembles the cut for given step lengths.
pub fn cut_from_steps(cone: &SimplicialCone, steps: Vec<f64>) -> Result<IntersectionCut> {
    if steps.iter().all(|t| t.is_infinite()) {
        return Err(Error::NoCut);
    }
    let d = cone.dim();
    let inv: Vec<f64> = steps.iter().map(|&t| if t.is_finite() { 1.0 / t } else { 0.0 }).collect();
    // pi^T R = (1/t)^T
    let rt = from_columns(&cone.rays, d).transpose();
    let pi = lu_solve(&rt, &inv).ok_or(Error::BadRays { condition: f64::INFINITY })?;
    let pi0 = 1.0 + dot(&pi, &cone.apex.stacked());
    let scale = norm(&pi);
    Ok(IntersectionCut { pi: pi.iter().map(|v| v / scale).collect(), pi0: pi0 / scale, steps })
}

#[derive(Debug, Clone, Serialize)]
pub struct CutValidation {
    pub valid: bool,
    /// `pi0 - pi^T apex`; must be at least `TAU_CERT`.
    pub apex_violation: f64,
    pub samples_checked: usize,
    pub violations: usize,
    pub counterexamples: Vec<SplitPoint>,
}

/// Checks `cut` on `count` seeded points of `cone ∩ Q` and at the apex.
pub fn validate_cut(cut: &IntersectionCut, cone: &SimplicialCone, count: usize, seed: u64) -> CutValidation {
    let apex_violation = -cut.slack(&cone.apex);
    let finite: Vec<f64> = cut.steps.iter().copied().filter(|t| t.is_finite()).collect();
    let reach = 3.0 * finite.iter().copied().fold(1.0, f64::max);
    let d = cone.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    let mut violations = 0;
    let mut counterexamples = Vec::new();
    let mut attempts = 0usize;
    while checked < count && attempts < count.saturating_mul(1000) {
        attempts += 1;
        // mix full-dimensional draws with draws on low-dimensional faces
        let face_mask: u64 = if attempts % 2 == 0 { rng.random() } else { u64::MAX };
        let lambda: Vec<f64> = (0..d)
            .map(|j| if face_mask >> (j % 64) & 1 == 1 { reach * rng.random::<f64>() } else { 0.0 })
            .collect();
        let p = cone.point(&lambda);
        if !in_q(&p) {
            continue;
        }
        checked += 1;
        if cut.slack(&p) < -CUT_TOL {
            violations += 1;
            if counterexamples.len() < 16 {
                counterexamples.push(p);
            }
        }
    }
    CutValidation {
        valid: violations == 0 && apex_violation >= TAU_CERT,
        apex_violation,
        samples_checked: checked,
        violations,
        counterexamples,
    }
}
