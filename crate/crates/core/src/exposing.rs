//! Exposing vectors and the explicit exposing sequences `(x^t, y^t)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::Gamma;
use crate::geometry::{in_q, QFreeSet, SplitPoint, UnitVector, TAU_MEMBER};
use crate::linalg::{dot, norm, spherical_distance};
use crate::lp;
use crate::sphere::SampleSet;
use crate::verifier::push_box;

/// Inequalities within this spherical distance of `β̄` are left out of the LP.
pub const EXCLUSION_RADIUS: f64 = 1e-3;
pub const WITNESS_BOX: f64 = 2.0;
/// Least LP slack accepted as evidence that `β̄` is exposed.
pub const EXPOSURE_SLACK: f64 = 1e-9;
/// Allowed residual of the tight equation at `β̄`.
pub const TIGHT_TOL: f64 = 1e-8;

/// A vector `(x̄, ȳ)` tight at `β̄` and strictly inside every other inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposingWitness {
    pub beta_bar: UnitVector,
    pub gamma_bar: UnitVector,
    pub xbar: Vec<f64>,
    pub ybar: Vec<f64>,
    /// `‖x̄‖² - ‖ȳ‖²`.
    #[serde(rename = "Delta")]
    pub delta: f64,
    pub t_bar: u64,
    /// LP slack when the witness came from [`find_exposing_vector`].
    pub slack: Option<f64>,
}

fn start_condition(t: u64, ynorm: f64) -> f64 {
    let t = t as f64;
    6.0 * t - 8.0 * (2.0 * t + 1.0).sqrt() * ynorm - 1.0
}

/// Least positive integer `t` with `6t - 8√(2t+1)·c - 1 >= 0`.
pub fn start_index(ynorm: f64) -> u64 {
    // with u = √(2t+1): 3u² - 8cu - 4 >= 0
    let u = (8.0 * ynorm + (64.0 * ynorm * ynorm + 48.0).sqrt()) / 6.0;
    let mut t = (((u * u - 1.0) / 2.0).ceil() as u64).max(1);
    while t > 1 && start_condition(t - 1, ynorm) >= 0.0 {
        t -= 1;
    }
    while start_condition(t, ynorm) < 0.0 {
        t += 1;
    }
    t
}

impl ExposingWitness {
    pub fn new(gamma: &Gamma, beta_bar: UnitVector, xbar: Vec<f64>, ybar: Vec<f64>) -> Result<Self> {
        if xbar.len() != gamma.n() {
            return Err(Error::DimensionMismatch { expected: gamma.n(), got: xbar.len() });
        }
        if ybar.len() != gamma.m() {
            return Err(Error::DimensionMismatch { expected: gamma.m(), got: ybar.len() });
        }
        let gamma_bar = gamma.evaluate(&beta_bar)?;
        let residual = dot(&gamma_bar, &xbar) - dot(&beta_bar, &ybar);
        if residual.abs() > TIGHT_TOL {
            return Err(Error::InvalidWitness(format!("inequality at beta_bar not tight: {residual}")));
        }
        let delta = dot(&xbar, &xbar) - dot(&ybar, &ybar);
        let t_bar = start_index(norm(&ybar));
        Ok(Self { beta_bar, gamma_bar, xbar, ybar, delta, t_bar, slack: None })
    }

    /// `Δ <= 0`: `(x̄, ȳ)` itself lies in Q and the sequence is constant.
    pub fn is_constant(&self) -> bool {
        self.delta <= 0.0
    }
}

/// Maximizes `δ` subject to a tight inequality at `β̄`, `δ`-slack at every
/// enumerated `β` farther than [`EXCLUSION_RADIUS`], and `‖(x̄, ȳ)‖_∞ <= 2`.
pub fn find_exposing_vector(c: &QFreeSet, beta_bar: &UnitVector) -> Result<ExposingWitness> {
    let gamma = c.gamma();
    if beta_bar.dim() != gamma.m() {
        return Err(Error::DimensionMismatch { expected: gamma.m(), got: beta_bar.dim() });
    }
    let (n, m) = (gamma.n(), gamma.m());
    let d = n + m;
    let gbar = gamma.evaluate(beta_bar)?;
    let tight: Vec<f64> = gbar.iter().copied().chain(beta_bar.iter().map(|v| -v)).chain([0.0]).collect();
    let mut rows = vec![tight.clone(), tight.iter().map(|v| -v).collect()];
    let mut rhs = vec![0.0, 0.0];
    for (g, b) in c.rows() {
        if spherical_distance(b, beta_bar) <= EXCLUSION_RADIUS {
            continue;
        }
        let mut r: Vec<f64> = g.iter().map(|v| -v).chain(b.iter().copied()).collect();
        r.push(1.0);
        rows.push(r);
        rhs.push(0.0);
    }
    push_box(&mut rows, &mut rhs, d, WITNESS_BOX);
    let mut obj = vec![0.0; d + 1];
    obj[d] = 1.0;
    let sol = lp::maximize(&obj, &rows, &rhs)?;
    let slack = sol.w[d];
    if slack < EXPOSURE_SLACK {
        return Err(Error::NotExposed { delta: slack });
    }
    let mut w = ExposingWitness::new(gamma, beta_bar.clone(), sol.w[..n].to_vec(), sol.w[n..d].to_vec())?;
    w.slack = Some(slack);
    Ok(w)
}

/// `x^t = Γ(β̄) + (√(2t+1)/t)·x̄`, `y^t = (1 + 4Δ/t)·β̄ + (√(2t+1)/t)·ȳ` for
/// `Δ > 0`; the constant point `(x̄, ȳ)` otherwise.
pub fn exposing_point(w: &ExposingWitness, t: u64) -> Result<SplitPoint> {
    if w.is_constant() {
        return SplitPoint::new(w.xbar.clone(), w.ybar.clone());
    }
    if t < w.t_bar {
        return Err(Error::BelowStart { t, t_bar: w.t_bar });
    }
    let tf = t as f64;
    let s = (2.0 * tf + 1.0).sqrt() / tf;
    let lead = 1.0 + 4.0 * w.delta / tf;
    let x = w.gamma_bar.iter().zip(&w.xbar).map(|(g, x)| g + s * x).collect();
    let y = w.beta_bar.iter().zip(&w.ybar).map(|(b, y)| lead * b + s * y).collect();
    SplitPoint::new(x, y)
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub t: u64,
    pub point: SplitPoint,
    pub in_q: bool,
    /// Sampled `β` with `Γ(β)^T x^t - β^T y^t <= TAU_MEMBER`.
    pub tight_betas: Vec<Vec<f64>>,
    pub max_dist: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct ConvergenceTrace {
    pub entries: Vec<TraceEntry>,
}

impl ConvergenceTrace {
    /// `max_dist` never grows by more than `noise` from one entry to the next.
    pub fn non_increasing(&self, noise: f64) -> bool {
        self.entries.windows(2).all(|w| w[1].max_dist <= w[0].max_dist + noise)
    }

    pub fn final_max_dist(&self) -> Option<f64> {
        self.entries.last().map(|e| e.max_dist)
    }

    pub fn all_in_q(&self) -> bool {
        self.entries.iter().all(|e| e.in_q)
    }
}

/// Separating inequalities of the sequence at each `t` (samples plus `β̄`).
pub fn trace_convergence(c: &QFreeSet, w: &ExposingWitness, t_list: &[u64], samples: &SampleSet) -> Result<ConvergenceTrace> {
    if t_list.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::UnorderedTList);
    }
    let gamma = c.gamma();
    if samples.dim() != gamma.m() {
        return Err(Error::DimensionMismatch { expected: gamma.m(), got: samples.dim() });
    }
    let mut betas: Vec<UnitVector> = samples.points().to_vec();
    betas.push(w.beta_bar.clone());
    let images: Vec<UnitVector> = betas.iter().map(|b| gamma.evaluate(b)).collect::<Result<_>>()?;
    let mut entries = Vec::with_capacity(t_list.len());
    for &t in t_list {
        if !w.is_constant() && t < w.t_bar {
            return Err(Error::BelowStart { t, t_bar: w.t_bar });
        }
        let p = exposing_point(w, t)?;
        let mut tight_betas = Vec::new();
        let mut max_dist: f64 = 0.0;
        for (b, g) in betas.iter().zip(&images) {
            if dot(g, &p.x) - dot(b, &p.y) <= TAU_MEMBER {
                max_dist = max_dist.max(spherical_distance(b, &w.beta_bar));
                tight_betas.push(b.to_vec());
            }
        }
        if tight_betas.is_empty() {
            return Err(Error::EmptySeparatingSet { t });
        }
        entries.push(TraceEntry { t, in_q: in_q(&p), point: p, tight_betas, max_dist });
    }
    Ok(ConvergenceTrace { entries })
}
