//! Sample-certified checks of non-expansivity, origin exclusion, maximality
//! and polyhedrality of `C_Γ`.
//!
//! Every verdict is evidence gathered on a finite sample of the sphere, never
//! a proof; reports carry the sample sizes and seed that produced them.

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::cover::{build_cover, Anchor};
use crate::error::{Error, Result};
use crate::gamma::Gamma;
use crate::geometry::{SplitPoint, UnitVector, TAU_CERT, TAU_ISO};
use crate::linalg::{dot, norm, sub};
use crate::lp;
use crate::sphere::{SampleLayout, SampleSet};

/// Pairs at least this far apart (radians) decide strictness.
pub const STRICT_BAND: f64 = 1e-2;
/// Random pairs drawn for scattered samples.
pub const RANDOM_PAIRS: usize = 100_000;
/// Above this size, sample sets are checked on random pairs instead of all pairs.
const ALL_PAIRS_LIMIT: usize = 4096;
/// Witness lists in reports are truncated to this length.
const WITNESS_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    Expansive,
    Isometric,
    StrictlyNonExpansive,
}

/// Classification of `(β, β')` by `gap = β^T β' - Γ(β)^T Γ(β')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairClass {
    pub kind: PairKind,
    pub gap: f64,
}

impl PairClass {
    pub fn from_gap(gap: f64) -> Self {
        let kind = if gap > TAU_ISO {
            PairKind::Expansive
        } else if gap < -TAU_ISO {
            PairKind::StrictlyNonExpansive
        } else {
            PairKind::Isometric
        };
        Self { kind, gap }
    }
}

pub fn classify_pair(gamma: &Gamma, beta: &UnitVector, beta_prime: &UnitVector) -> Result<PairClass> {
    let g = gamma.evaluate(beta)?;
    let h = gamma.evaluate(beta_prime)?;
    Ok(PairClass::from_gap(dot(beta, beta_prime) - dot(&g, &h)))
}

/// A pass/fail outcome, always labelled as sample-certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict(pub bool);

impl Verdict {
    pub fn passed(self) -> bool {
        self.0
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Verdict", 2)?;
        st.serialize_field("result", if self.0 { "pass" } else { "fail" })?;
        st.serialize_field("certification", "sample-certified")?;
        st.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairWitness {
    pub beta: Vec<f64>,
    pub beta_prime: Vec<f64>,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NonExpansiveReport {
    pub verdict: Verdict,
    pub max_gap: f64,
    pub worst_pair: Option<PairWitness>,
    /// Most negative gap among distinct pairs.
    pub min_gap: f64,
    /// Max gap among pairs at spherical distance `>= strict_band`.
    pub max_gap_outside_band: f64,
    pub strict_band: f64,
    /// `max_gap_outside_band < -TAU_ISO`.
    pub strict: bool,
    /// Distinct pairs with `|gap| <= TAU_ISO`.
    pub offdiag_isometric_pairs: usize,
    pub pairs_checked: usize,
}

#[derive(Clone, Copy)]
struct PairStats {
    max_gap: f64,
    worst: (usize, usize),
    min_gap: f64,
    max_outside: f64,
    isometric: usize,
    pairs: usize,
}

impl PairStats {
    const EMPTY: Self = Self {
        max_gap: f64::NEG_INFINITY,
        worst: (usize::MAX, usize::MAX),
        min_gap: f64::INFINITY,
        max_outside: f64::NEG_INFINITY,
        isometric: 0,
        pairs: 0,
    };

    fn push(&mut self, i: usize, j: usize, gap: f64, far: bool) {
        if gap > self.max_gap || gap == self.max_gap && (i, j) < self.worst {
            self.max_gap = gap;
            self.worst = (i, j);
        }
        self.min_gap = self.min_gap.min(gap);
        if far {
            self.max_outside = self.max_outside.max(gap);
        }
        if gap.abs() <= TAU_ISO {
            self.isometric += 1;
        }
        self.pairs += 1;
    }

    fn merge(mut self, o: Self) -> Self {
        if o.max_gap > self.max_gap || o.max_gap == self.max_gap && o.worst < self.worst {
            self.max_gap = o.max_gap;
            self.worst = o.worst;
        }
        self.min_gap = self.min_gap.min(o.min_gap);
        self.max_outside = self.max_outside.max(o.max_outside);
        self.isometric += o.isometric;
        self.pairs += o.pairs;
        self
    }
}

fn images(gamma: &Gamma, points: &[UnitVector]) -> Result<Vec<UnitVector>> {
    points.par_iter().map(|b| gamma.evaluate(b)).collect()
}

/// Max of `β^T β' - Γ(β)^T Γ(β')` over sampled pairs: all pairs for grids and
/// small sets, [`RANDOM_PAIRS`] seeded pairs plus every anchor pair otherwise.
pub fn check_nonexpansive(gamma: &Gamma, samples: &SampleSet, seed: u64) -> Result<NonExpansiveReport> {
    if samples.dim() != gamma.m() {
        return Err(Error::DimensionMismatch { expected: gamma.m(), got: samples.dim() });
    }
    let mut points: Vec<UnitVector> = samples.points().to_vec();
    let exhaustive = matches!(samples.layout(), SampleLayout::AngularGrid { .. } | SampleLayout::Antipodal)
        || samples.len() <= ALL_PAIRS_LIMIT;
    let anchor_start = points.len();
    if let Some(dirs) = gamma.anchor_directions() {
        points.extend(dirs);
    }
    let imgs = images(gamma, &points)?;
    let cos_band = STRICT_BAND.cos();
    let gap = |i: usize, j: usize| dot(&points[i], &points[j]) - dot(&imgs[i], &imgs[j]);
    let far = |i: usize, j: usize| dot(&points[i], &points[j]) <= cos_band;

    let stats = if exhaustive {
        (0..points.len())
            .into_par_iter()
            .map(|i| {
                let mut s = PairStats::EMPTY;
                for j in i + 1..points.len() {
                    s.push(i, j, gap(i, j), far(i, j));
                }
                s
            })
            .reduce(|| PairStats::EMPTY, PairStats::merge)
    } else {
        let mut pairs = samples.random_pairs(RANDOM_PAIRS, seed);
        for i in anchor_start..points.len() {
            for j in i + 1..points.len() {
                pairs.push((i, j));
            }
        }
        pairs
            .par_chunks(4096)
            .map(|chunk| {
                let mut s = PairStats::EMPTY;
                for &(i, j) in chunk {
                    let (a, b) = if i < j { (i, j) } else { (j, i) };
                    s.push(a, b, gap(a, b), far(a, b));
                }
                s
            })
            .reduce(|| PairStats::EMPTY, PairStats::merge)
    };

    let worst_pair = (stats.pairs > 0).then(|| PairWitness {
        beta: points[stats.worst.0].to_vec(),
        beta_prime: points[stats.worst.1].to_vec(),
        gap: stats.max_gap,
    });
    let max_gap = if stats.pairs > 0 { stats.max_gap } else { 0.0 };
    Ok(NonExpansiveReport {
        verdict: Verdict(max_gap <= TAU_ISO),
        max_gap,
        worst_pair,
        min_gap: stats.min_gap,
        max_gap_outside_band: stats.max_outside,
        strict_band: STRICT_BAND,
        strict: stats.max_outside < -TAU_ISO,
        offdiag_isometric_pairs: stats.isometric,
        pairs_checked: stats.pairs,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OriginReport {
    pub verdict: Verdict,
    /// Optimal LP slack `δ*`.
    pub delta: f64,
    /// Box-feasible `(x, y)` attaining `δ*`; an interior point of `C_Γ` when `δ* > 0`.
    pub certificate: SplitPoint,
    /// Sampled margin at the certificate.
    pub certificate_margin: f64,
    pub constraints: usize,
}

/// `max δ` s.t. `Γ(β)^T x - β^T y >= δ` for sampled `β`, `‖(x, y)‖_∞ <= 1`.
pub fn check_origin_exclusion(gamma: &Gamma, samples: &SampleSet) -> Result<OriginReport> {
    if samples.dim() != gamma.m() {
        return Err(Error::DimensionMismatch { expected: gamma.m(), got: samples.dim() });
    }
    let (n, m) = (gamma.n(), gamma.m());
    let d = n + m;
    let imgs = images(gamma, samples.points())?;
    let normals: Vec<Vec<f64>> = samples
        .points()
        .iter()
        .zip(&imgs)
        .map(|(b, g)| g.iter().copied().chain(b.iter().map(|v| -v)).collect())
        .collect();
    let mut rows = Vec::with_capacity(normals.len() + 2 * d);
    let mut rhs = Vec::with_capacity(rows.capacity());
    for a in &normals {
        let mut r: Vec<f64> = a.iter().map(|v| -v).collect();
        r.push(1.0);
        rows.push(r);
        rhs.push(0.0);
    }
    push_box(&mut rows, &mut rhs, d, 1.0);
    let mut c = vec![0.0; d + 1];
    c[d] = 1.0;
    let sol = lp::maximize(&c, &rows, &rhs)?;
    let z = &sol.w[..d];
    let certificate_margin = normals.iter().map(|a| dot(a, z)).fold(f64::INFINITY, f64::min);
    let delta = sol.w[d];
    if certificate_margin < delta - 1e-8 {
        return Err(Error::Lp(format!(
            "certificate margin {certificate_margin} below reported slack {delta}"
        )));
    }
    Ok(OriginReport {
        verdict: Verdict(delta >= TAU_CERT),
        delta,
        certificate: SplitPoint::from_stacked(z, n),
        certificate_margin,
        constraints: rows.len(),
    })
}

/// Appends `|z_i| <= bound` for the first `d` variables (zero coefficients elsewhere).
pub(crate) fn push_box(rows: &mut Vec<Vec<f64>>, rhs: &mut Vec<f64>, d: usize, bound: f64) {
    let width = rows.first().map_or(d + 1, Vec::len);
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut r = vec![0.0; width];
            r[i] = s;
            rows.push(r);
            rhs.push(bound);
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PolyhedralReport {
    pub verdict: Verdict,
    /// The finite index set `I` (the anchors) when the cover is complete.
    pub index_set: Vec<Vec<f64>>,
    pub inequalities: usize,
    pub cliques: Vec<Vec<usize>>,
    pub uncovered_count: usize,
    pub uncovered: Vec<Vec<f64>>,
    /// Largest `‖Γ(β) - extension(β)‖` over samples; the conic extension must
    /// reproduce Γ on every covered cone when Γ is non-expansive.
    pub extension_max_deviation: Option<f64>,
    pub nonexpansive: bool,
}

/// Cover check for anchors `index` with images `Γ(index)`.
pub fn check_polyhedrality(
    gamma: &Gamma,
    index: &[UnitVector],
    samples: &SampleSet,
    seed: u64,
) -> Result<PolyhedralReport> {
    let nonexp = check_nonexpansive(gamma, samples, seed)?;
    polyhedrality_given(gamma, index, samples, nonexp.verdict.passed())
}

fn polyhedrality_given(gamma: &Gamma, index: &[UnitVector], samples: &SampleSet, nonexpansive: bool) -> Result<PolyhedralReport> {
    let anchors: Vec<Anchor> = index
        .iter()
        .map(|b| Ok(Anchor::new(b.clone(), gamma.evaluate(b)?)))
        .collect::<Result<_>>()?;
    match build_cover(anchors, samples) {
        Ok(cover) => {
            let deviation = samples
                .points()
                .par_iter()
                .map(|b| -> Result<f64> {
                    let g = gamma.evaluate(b)?;
                    let e = cover.extend(b)?;
                    Ok(norm(&sub(&g, &e)))
                })
                .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
            Ok(PolyhedralReport {
                verdict: Verdict(nonexpansive),
                index_set: index.iter().map(|b| b.to_vec()).collect(),
                inequalities: index.len(),
                cliques: cover.subsets().iter().map(|c| c.members().to_vec()).collect(),
                uncovered_count: 0,
                uncovered: Vec::new(),
                extension_max_deviation: Some(deviation),
                nonexpansive,
            })
        }
        Err(Error::CoverIncomplete { witnesses }) => Ok(PolyhedralReport {
            verdict: Verdict(false),
            index_set: Vec::new(),
            inequalities: 0,
            cliques: Vec::new(),
            uncovered_count: witnesses.len(),
            uncovered: witnesses.into_iter().take(WITNESS_LIMIT).collect(),
            extension_max_deviation: None,
            nonexpansive,
        }),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleMeta {
    pub seed: u64,
    pub sphere_samples: usize,
    pub layout: SampleLayout,
    pub pairs_checked: usize,
    pub lp_constraints: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub nonexpansive: NonExpansiveReport,
    pub origin_excluded: OriginReport,
    /// `nonexpansive ∧ origin_excluded`.
    pub maximal: Verdict,
    pub polyhedral: Option<PolyhedralReport>,
    pub sample_meta: SampleMeta,
}

/// `C_Γ` is full-dimensional maximal Q-free iff Γ is non-expansive and the
/// origin is outside `conv{(Γ(β), -β)}`; both halves checked on samples.
pub fn maximality_verdict(gamma: &Gamma, samples: &SampleSet, seed: u64) -> Result<VerificationReport> {
    let nonexpansive = check_nonexpansive(gamma, samples, seed)?;
    let origin_excluded = check_origin_exclusion(gamma, samples)?;
    let maximal = Verdict(nonexpansive.verdict.passed() && origin_excluded.verdict.passed());
    let sample_meta = SampleMeta {
        seed,
        sphere_samples: samples.len(),
        layout: samples.layout().clone(),
        pairs_checked: nonexpansive.pairs_checked,
        lp_constraints: origin_excluded.constraints,
    };
    Ok(VerificationReport { nonexpansive, origin_excluded, maximal, polyhedral: None, sample_meta })
}

impl VerificationReport {
    /// Adds the polyhedrality sub-report, reusing the non-expansivity result.
    pub fn with_polyhedrality(mut self, gamma: &Gamma, index: &[UnitVector], samples: &SampleSet) -> Result<Self> {
        let nonexp = self.nonexpansive.verdict.passed();
        self.polyhedral = Some(polyhedrality_given(gamma, index, samples, nonexp)?);
        Ok(self)
    }
}

/// Result of pushing a candidate anchor assignment through the full pipeline.
#[derive(Debug, Clone)]
pub enum AssignmentOutcome {
    CoverIncomplete { uncovered: usize },
    Rejected(Box<VerificationReport>),
    Accepted(Box<VerificationReport>),
}

impl AssignmentOutcome {
    pub fn accepted(&self) -> bool {
        matches!(self, Self::Accepted(_))
    }
}

/// Conic interpolation of `anchors`, cover check, then the maximality verdict.
pub fn assess_assignment(anchors: Vec<Anchor>, samples: &SampleSet, seed: u64) -> Result<AssignmentOutcome> {
    let cover = match build_cover(anchors.clone(), samples) {
        Ok(c) => c,
        Err(Error::CoverIncomplete { witnesses }) => {
            return Ok(AssignmentOutcome::CoverIncomplete { uncovered: witnesses.len() })
        }
        Err(e) => return Err(e),
    };
    let gamma = Gamma::new(crate::gamma::GammaSpec::ConicInterpolation { anchors })?;
    let index: Vec<UnitVector> = cover.anchors().iter().map(|a| a.beta.clone()).collect();
    let report = maximality_verdict(&gamma, samples, seed)?.with_polyhedrality(&gamma, &index, samples)?;
    let ok = report.maximal.passed() && report.polyhedral.as_ref().is_some_and(|p| p.verdict.passed());
    Ok(if ok {
        AssignmentOutcome::Accepted(Box::new(report))
    } else {
        AssignmentOutcome::Rejected(Box::new(report))
    })
}

/// Finds `λ >= 0` with `Σ λ_i g_i = v` (each coordinate to 1e-8), if any.
pub fn cone_membership(v: &[f64], generators: &[Vec<f64>]) -> Result<Option<Vec<f64>>> {
    if generators.is_empty() {
        return Err(Error::Lp("cone membership needs at least one generator".into()));
    }
    let d = v.len();
    if let Some(g) = generators.iter().find(|g| g.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: g.len() });
    }
    let problem = lp::StandardForm {
        a: (0..d).map(|i| generators.iter().map(|g| g[i]).collect()).collect(),
        b: v.to_vec(),
        c: vec![0.0; generators.len()],
    };
    let sol = lp::solve_standard(&problem)?;
    let lambda = sol.u;
    let residual = (0..d)
        .map(|i| (generators.iter().zip(&lambda).map(|(g, l)| g[i] * l).sum::<f64>() - v[i]).abs())
        .fold(0.0, f64::max);
    Ok((sol.status != lp::Status::Infeasible && residual <= 1e-8).then_some(lambda))
}

/// `‖Γ(β¹) - Γ(β²)‖ / ‖β¹ - β²‖`.
pub fn distance_ratio(gamma: &Gamma, b1: &UnitVector, b2: &UnitVector) -> Result<f64> {
    let g1 = gamma.evaluate(b1)?;
    let g2 = gamma.evaluate(b2)?;
    Ok(norm(&sub(&g1, &g2)) / norm(&sub(b1, b2)))
}

/// `Γ(β¹)^T Γ(β²) / β¹^T β²`.
pub fn inner_product_ratio(gamma: &Gamma, b1: &UnitVector, b2: &UnitVector) -> Result<f64> {
    let g1 = gamma.evaluate(b1)?;
    let g2 = gamma.evaluate(b2)?;
    Ok(dot(&g1, &g2) / dot(b1, b2))
}

/// `β(θ₁)^T β(θ₂) - Γ(β(θ₁))^T Γ(β(θ₂))` on a `count x count` angular grid.
#[derive(Debug, Clone, Serialize)]
pub struct GapSurface {
    pub label: &'static str,
    pub theta: Vec<f64>,
    pub gap: Vec<Vec<f64>>,
}

pub fn gap_surface(gamma: &Gamma, count: usize) -> Result<GapSurface> {
    if gamma.m() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: gamma.m() });
    }
    let grid = SampleSet::angular_grid(count);
    let imgs = images(gamma, grid.points())?;
    let theta = (0..count).map(|k| std::f64::consts::TAU * k as f64 / count as f64).collect();
    let pts = grid.points();
    let gap = (0..count)
        .map(|i| (0..count).map(|j| dot(&pts[i], &pts[j]) - dot(&imgs[i], &imgs[j])).collect())
        .collect();
    Ok(GapSurface { label: "gap_surface", theta, gap })
}
