//! The Γ-function families `D^m -> D^n` and their evaluation.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::cover::{Anchor, IsometricCover};
use crate::error::{Error, Result};
use crate::geometry::{UnitVector, TAU_UNIT};

/// Declarative description of a Γ map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GammaSpecWire", into = "GammaSpecWire")]
pub enum GammaSpec {
    /// `Γ ≡ g` on `D^m`.
    Constant { g: UnitVector, m: usize },
    /// `n = m = 2`: `β(θ) ↦ (cos γ(θ), sin γ(θ))` with `γ` a piecewise
    /// polynomial in the absolute angle `θ ∈ [0, 2π]`.
    PolarPiecewisePoly { breakpoints: Vec<f64>, coeffs: Vec<Vec<f64>> },
    /// `Γ(β) = |β|` componentwise, `n = m = dim`.
    ComponentwiseAbs { dim: usize },
    /// Extension from anchors through isometric cliques.
    ConicInterpolation { anchors: Vec<Anchor> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum GammaSpecWire {
    Constant { n: usize, m: usize, g: Vec<f64> },
    PolarPiecewisePoly { n: usize, m: usize, breakpoints: Vec<f64>, coeffs: Vec<Vec<f64>> },
    ComponentwiseAbs { n: usize, m: usize },
    ConicInterpolation { n: usize, m: usize, anchors: Vec<Anchor> },
}

fn expect_dim(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{what}: expected {expected}, got {got}")))
    }
}

impl TryFrom<GammaSpecWire> for GammaSpec {
    type Error = Error;
    fn try_from(w: GammaSpecWire) -> Result<Self> {
        Ok(match w {
            GammaSpecWire::Constant { n, m, g } => {
                expect_dim("length of g", n, g.len())?;
                if m == 0 {
                    return Err(Error::InvalidSpec("m must be positive".into()));
                }
                GammaSpec::Constant { g: UnitVector::new(g)?, m }
            }
            GammaSpecWire::PolarPiecewisePoly { n, m, breakpoints, coeffs } => {
                expect_dim("n", 2, n)?;
                expect_dim("m", 2, m)?;
                GammaSpec::PolarPiecewisePoly { breakpoints, coeffs }
            }
            GammaSpecWire::ComponentwiseAbs { n, m } => {
                expect_dim("n", m, n)?;
                GammaSpec::ComponentwiseAbs { dim: m }
            }
            GammaSpecWire::ConicInterpolation { n, m, anchors } => {
                for a in &anchors {
                    expect_dim("anchor beta length", m, a.beta.dim())?;
                    expect_dim("anchor image length", n, a.image.dim())?;
                }
                GammaSpec::ConicInterpolation { anchors }
            }
        })
    }
}

impl From<GammaSpec> for GammaSpecWire {
    fn from(s: GammaSpec) -> Self {
        match s {
            GammaSpec::Constant { g, m } => GammaSpecWire::Constant { n: g.dim(), m, g: g.into() },
            GammaSpec::PolarPiecewisePoly { breakpoints, coeffs } => {
                GammaSpecWire::PolarPiecewisePoly { n: 2, m: 2, breakpoints, coeffs }
            }
            GammaSpec::ComponentwiseAbs { dim } => GammaSpecWire::ComponentwiseAbs { n: dim, m: dim },
            GammaSpec::ConicInterpolation { anchors } => {
                let (n, m) = anchors.first().map_or((0, 0), |a| (a.image.dim(), a.beta.dim()));
                GammaSpecWire::ConicInterpolation { n, m, anchors }
            }
        }
    }
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

/// A validated Γ ready for evaluation.
#[derive(Debug, Clone)]
pub struct Gamma {
    spec: GammaSpec,
    n: usize,
    m: usize,
    cover: Option<IsometricCover>,
}

impl Gamma {
    pub fn new(spec: GammaSpec) -> Result<Self> {
        let (n, m, cover) = match &spec {
            GammaSpec::Constant { g, m } => {
                if *m == 0 {
                    return Err(Error::InvalidSpec("m must be positive".into()));
                }
                (g.dim(), *m, None)
            }
            GammaSpec::PolarPiecewisePoly { breakpoints, coeffs } => {
                validate_polar(breakpoints, coeffs)?;
                (2, 2, None)
            }
            GammaSpec::ComponentwiseAbs { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidSpec("dimension must be positive".into()));
                }
                (*dim, *dim, None)
            }
            GammaSpec::ConicInterpolation { anchors } => {
                let cover = IsometricCover::from_anchors(anchors.clone())?;
                (cover.n(), cover.m(), Some(cover))
            }
        };
        Ok(Self { spec, n, m, cover })
    }

    pub fn spec(&self) -> &GammaSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The clique structure for conic interpolation.
    pub fn cover(&self) -> Option<&IsometricCover> {
        self.cover.as_ref()
    }

    /// Anchor directions for conic interpolation (the natural polyhedral index set).
    pub fn anchor_directions(&self) -> Option<Vec<UnitVector>> {
        match &self.spec {
            GammaSpec::ConicInterpolation { anchors } => Some(anchors.iter().map(|a| a.beta.clone()).collect()),
            _ => None,
        }
    }

    /// Kink angles of a polar Γ, empty otherwise.
    pub fn breakpoints(&self) -> &[f64] {
        match &self.spec {
            GammaSpec::PolarPiecewisePoly { breakpoints, .. } => breakpoints,
            _ => &[],
        }
    }

    /// `γ(θ)` for the polar family.
    pub fn polar_angle(&self, theta: f64) -> Option<f64> {
        match &self.spec {
            GammaSpec::PolarPiecewisePoly { breakpoints, coeffs } => {
                let k = breakpoints[1..breakpoints.len() - 1].partition_point(|&b| b <= theta);
                Some(horner(&coeffs[k], theta))
            }
            _ => None,
        }
    }

    /// `Γ(β)`.
    pub fn evaluate(&self, beta: &UnitVector) -> Result<UnitVector> {
        if beta.dim() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: beta.dim() });
        }
        match &self.spec {
            GammaSpec::Constant { g, .. } => Ok(g.clone()),
            GammaSpec::PolarPiecewisePoly { .. } => {
                let theta = beta[1].atan2(beta[0]).rem_euclid(TAU);
                let gamma = self.polar_angle(theta).expect("polar family");
                Ok(UnitVector::from_angle(gamma))
            }
            GammaSpec::ComponentwiseAbs { .. } => {
                Ok(UnitVector::from_raw(beta.iter().map(|v| v.abs()).collect()))
            }
            GammaSpec::ConicInterpolation { .. } => self.cover.as_ref().expect("cover built").extend(beta),
        }
    }
}

fn validate_polar(breakpoints: &[f64], coeffs: &[Vec<f64>]) -> Result<()> {
    let k = breakpoints.len();
    if k < 2 {
        return Err(Error::InvalidSpec("need at least two breakpoints".into()));
    }
    if breakpoints[0].abs() > 1e-12 || (breakpoints[k - 1] - TAU).abs() > TAU_UNIT {
        return Err(Error::InvalidSpec("breakpoints must run from 0 to 2π".into()));
    }
    if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSpec("breakpoints must be strictly increasing".into()));
    }
    if coeffs.len() != k - 1 || coeffs.iter().any(Vec::is_empty) {
        return Err(Error::InvalidSpec(format!("expected {} coefficient lists", k - 1)));
    }
    for i in 1..k - 1 {
        let left = horner(&coeffs[i - 1], breakpoints[i]);
        let right = horner(&coeffs[i], breakpoints[i]);
        if (left - right).abs() > 1e-9 {
            return Err(Error::InvalidSpec(format!(
                "γ discontinuous at θ = {}: {left} vs {right}",
                breakpoints[i]
            )));
        }
    }
    let start = horner(&coeffs[0], breakpoints[0]);
    let end = horner(&coeffs[k - 2], breakpoints[k - 1]);
    let wrap = (end - start).rem_euclid(TAU);
    if wrap.min(TAU - wrap) > TAU_UNIT {
        return Err(Error::InvalidSpec("γ(0) and γ(2π) differ modulo 2π".into()));
    }
    Ok(())
}

impl TryFrom<GammaSpec> for Gamma {
    type Error = Error;
    fn try_from(spec: GammaSpec) -> Result<Self> {
        Gamma::new(spec)
    }
}

impl From<Gamma> for GammaSpec {
    fn from(g: Gamma) -> Self {
        g.spec
    }
}

impl Serialize for Gamma {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.spec.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Gamma {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = GammaSpec::deserialize(d)?;
        Gamma::new(spec).map_err(serde::de::Error::custom)
    }
}
