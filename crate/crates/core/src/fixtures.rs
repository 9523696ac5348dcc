//! Named example Γ's with the verdicts they are known to produce.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::cover::Anchor;
use crate::error::{Error, Result};
use crate::gamma::{Gamma, GammaSpec};
use crate::geometry::UnitVector;
use crate::linalg::dot;
use crate::sphere::SampleSet;
use crate::verifier::{assess_assignment, distance_ratio, inner_product_ratio, maximality_verdict, AssignmentOutcome};

pub const NAMES: [&str; 9] = [
    "ex1",
    "ex2",
    "ex3",
    "ex3-amended",
    "ex4",
    "remark-contracting",
    "sec7-four-points",
    "constant",
    "opposing",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub maximal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polyhedral: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strict: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<GammaSpec>,
    /// Candidate anchor assignments, each tried as a conic interpolation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assignments: Vec<Vec<Anchor>>,
    /// Anchor directions for the polyhedrality check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<Vec<UnitVector>>,
    pub expected: Expected,
}

fn u(v: &[f64]) -> UnitVector {
    UnitVector::new(v.to_vec()).expect("fixture vectors are unit")
}

fn signed_basis(dim: usize) -> Vec<UnitVector> {
    (0..dim).flat_map(|i| [UnitVector::basis(dim, i), UnitVector::basis(dim, i).neg()]).collect()
}

/// `γ(θ) = -θ(θ - 2π)/(4π)`.
pub fn remark_spec() -> GammaSpec {
    GammaSpec::PolarPiecewisePoly {
        breakpoints: vec![0.0, 2.0 * PI],
        coeffs: vec![vec![0.0, 0.5, -1.0 / (4.0 * PI)]],
    }
}

pub fn ex4_spec() -> GammaSpec {
    GammaSpec::PolarPiecewisePoly {
        breakpoints: vec![0.0, PI / 2.0, PI, 1.25 * PI, 2.0 * PI],
        coeffs: vec![vec![0.0, 1.0], vec![PI, -1.0], vec![-PI, 1.0], vec![2.0 * PI / 3.0, -1.0 / 3.0]],
    }
}

pub fn ex3_anchors() -> Vec<Anchor> {
    let r = FRAC_1_SQRT_2;
    let e = |i: usize| UnitVector::basis(3, i);
    let down = e(1).neg();
    let diag = u(&[-r, r, 0.0]);
    vec![
        Anchor::new(e(2), e(2)),
        Anchor::new(e(2).neg(), e(2)),
        Anchor::new(e(0), down.clone()),
        Anchor::new(e(0).neg(), down.clone()),
        Anchor::new(e(1).neg(), down),
        Anchor::new(e(1), e(0).neg()),
        Anchor::new(u(&[-r, r, 0.0]), diag.clone()),
        Anchor::new(u(&[-r, -r, 0.0]), diag),
    ]
}

/// [`ex3_anchors`] with `-e¹` and `-e²` sent to `-e¹`, which makes the
/// anchors pairwise non-expansive and their isometric cliques cover `D³`.
pub fn ex3_amended_anchors() -> Vec<Anchor> {
    let mut anchors = ex3_anchors();
    let left = UnitVector::basis(3, 0).neg();
    anchors[3].image = left.clone();
    anchors[4].image = left;
    anchors
}

/// Four points on D² and every image assignment making consecutive points
/// (around the circle) isometric, with the first image fixed at angle 0.
pub fn four_point_assignments() -> Vec<Vec<Anchor>> {
    let betas = four_points();
    let steps: Vec<f64> = (0..3).map(|k| dot(&betas[k], &betas[k + 1]).clamp(-1.0, 1.0).acos()).collect();
    let mut out = Vec::new();
    for mask in 0..8u32 {
        let mut phi = 0.0;
        let mut anchors = vec![Anchor::new(betas[0].clone(), UnitVector::from_angle(0.0))];
        for (k, s) in steps.iter().enumerate() {
            phi += if mask >> k & 1 == 0 { *s } else { -*s };
            anchors.push(Anchor::new(betas[k + 1].clone(), UnitVector::from_angle(phi)));
        }
        out.push(anchors);
    }
    out
}

pub fn four_points() -> Vec<UnitVector> {
    vec![
        u(&[0.0, 1.0]),
        u(&[1.0, 0.0]),
        u(&[0.0, -1.0]),
        UnitVector::normalized(vec![-(2f64 / 3.0).sqrt(), -(1f64 / 3.0).sqrt()]).expect("nonzero"),
    ]
}

pub fn opposing_spec() -> GammaSpec {
    GammaSpec::ConicInterpolation {
        anchors: signed_basis(2).into_iter().map(|b| Anchor::new(b.clone(), b)).collect(),
    }
}

pub fn fixture(name: &str) -> Result<Fixture> {
    let f = |gamma: GammaSpec, index: Option<Vec<UnitVector>>, expected: Expected| Fixture {
        name: name.to_string(),
        gamma: Some(gamma),
        assignments: Vec::new(),
        index,
        expected,
    };
    let exp = |maximal, polyhedral, strict| Expected { maximal, polyhedral, strict };
    Ok(match name {
        "ex1" | "remark-contracting" => f(remark_spec(), None, exp(true, None, Some(true))),
        "ex2" => f(GammaSpec::ComponentwiseAbs { dim: 2 }, Some(signed_basis(2)), exp(true, Some(true), Some(false))),
        "ex3" | "ex3-amended" => {
            let anchors = if name == "ex3" { ex3_anchors() } else { ex3_amended_anchors() };
            let index = anchors.iter().map(|a| a.beta.clone()).collect();
            f(GammaSpec::ConicInterpolation { anchors }, Some(index), exp(true, Some(true), None))
        }
        "ex4" => f(ex4_spec(), None, exp(true, None, Some(false))),
        "constant" => f(GammaSpec::Constant { g: UnitVector::basis(2, 0), m: 2 }, None, exp(true, None, Some(true))),
        "opposing" => f(opposing_spec(), None, exp(false, None, None)),
        "sec7-four-points" => Fixture {
            name: name.to_string(),
            gamma: None,
            assignments: four_point_assignments(),
            index: Some(four_points()),
            expected: exp(false, Some(false), None),
        },
        other => return Err(Error::InvalidSpec(format!("unknown example {other:?}; known: {}", NAMES.join(", ")))),
    })
}

pub fn registry() -> Vec<Fixture> {
    NAMES.iter().map(|n| fixture(n).expect("registered")).collect()
}

/// `θ = 10^-1, ..., 10^-5` and the ratios between `β¹ = e¹` and `β(θ)`.
#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    pub theta: Vec<f64>,
    pub distance_ratio: Vec<f64>,
    pub inner_product_ratio: Vec<f64>,
}

pub fn contraction_ratios(gamma: &Gamma) -> Result<RatioReport> {
    let theta: Vec<f64> = (1..=5).map(|k| 10f64.powi(-k)).collect();
    let b1 = UnitVector::basis(2, 0);
    let mut distance = Vec::new();
    let mut inner = Vec::new();
    for &t in &theta {
        let b2 = UnitVector::from_angle(t);
        distance.push(distance_ratio(gamma, &b1, &b2)?);
        inner.push(inner_product_ratio(gamma, &b1, &b2)?);
    }
    Ok(RatioReport { theta, distance_ratio: distance, inner_product_ratio: inner })
}

#[derive(Debug, Clone, Serialize)]
pub struct FixtureOutcome {
    pub name: String,
    pub maximal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polyhedral: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin_slack: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub assignments: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratios: Option<RatioReport>,
    pub expected: Expected,
    pub matches_expected: bool,
}

/// Runs the full verification pipeline on the fixture's default samples.
pub fn run_fixture(f: &Fixture, seed: u64) -> Result<FixtureOutcome> {
    let mut out = FixtureOutcome {
        name: f.name.clone(),
        maximal: false,
        polyhedral: None,
        strict: None,
        max_gap: None,
        origin_slack: None,
        assignments: Vec::new(),
        ratios: None,
        expected: f.expected.clone(),
        matches_expected: false,
    };
    if let Some(spec) = &f.gamma {
        let gamma = Gamma::new(spec.clone())?;
        let samples = SampleSet::default_for(gamma.m(), seed);
        let mut report = maximality_verdict(&gamma, &samples, seed)?;
        if let Some(index) = &f.index {
            report = report.with_polyhedrality(&gamma, index, &samples)?;
        }
        out.maximal = report.maximal.passed();
        out.strict = Some(report.nonexpansive.strict);
        out.max_gap = Some(report.nonexpansive.max_gap);
        out.origin_slack = Some(report.origin_excluded.delta);
        out.polyhedral = report.polyhedral.as_ref().map(|p| p.verdict.passed());
        if f.name == "remark-contracting" {
            out.ratios = Some(contraction_ratios(&gamma)?);
        }
    } else {
        let samples = SampleSet::default_for(2, seed);
        let mut any = false;
        for a in &f.assignments {
            let outcome = assess_assignment(a.clone(), &samples, seed)?;
            any |= outcome.accepted();
            out.assignments.push(match outcome {
                AssignmentOutcome::CoverIncomplete { uncovered } => format!("cover incomplete ({uncovered} uncovered samples)"),
                AssignmentOutcome::Rejected(r) => format!(
                    "rejected (max gap {:.3e}, origin slack {:.3e})",
                    r.nonexpansive.max_gap, r.origin_excluded.delta
                ),
                AssignmentOutcome::Accepted(_) => "accepted".to_string(),
            });
        }
        out.maximal = any;
        out.polyhedral = Some(any);
    }
    let e = &out.expected;
    out.matches_expected = out.maximal == e.maximal
        && e.polyhedral.is_none_or(|p| out.polyhedral == Some(p))
        && e.strict.is_none_or(|s| out.strict == Some(s));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_builds() {
        for f in registry() {
            if let Some(spec) = &f.gamma {
                Gamma::new(spec.clone()).unwrap();
            }
        }
        assert!(fixture("nope").is_err());
    }

    #[test]
    fn fixtures_round_trip() {
        for f in registry() {
            let s = serde_json::to_string(&f).unwrap();
            let back: Fixture = serde_json::from_str(&s).unwrap();
            assert_eq!(back, f);
        }
    }

    #[test]
    fn four_point_assignments_are_consecutively_isometric() {
        let all = four_point_assignments();
        assert_eq!(all.len(), 8);
        for a in &all {
            for k in 0..3 {
                assert!(a[k].is_isometric(&a[k + 1]));
            }
        }
    }

    #[test]
    fn ex3_listed_images_are_expansive() {
        let a = ex3_anchors();
        // -e¹ ↦ -e² against (-e¹ + e²)/√2 ↦ itself
        assert!((a[3].gap(&a[6]) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ex3_amended_anchor_images() {
        let g = Gamma::new(fixture("ex3-amended").unwrap().gamma.unwrap()).unwrap();
        let anchors = ex3_amended_anchors();
        for (i, a) in anchors.iter().enumerate() {
            for b in &anchors[i + 1..] {
                assert!(a.gap(b) <= 1e-12);
            }
        }
        for a in anchors {
            let v = g.evaluate(&a.beta).unwrap();
            let cliques: Vec<Vec<usize>> = g.cover().unwrap().subsets().iter().map(|c| c.members().to_vec()).collect();
            assert!(v.iter().zip(a.image.iter()).all(|(x, y)| (x - y).abs() < 1e-12), "{a:?} -> {v:?} {cliques:?}");
        }
    }
}
