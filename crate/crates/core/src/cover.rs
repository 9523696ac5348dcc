//! Isometric covers: finite anchor sets whose pairwise-isometric subsets
//! conically span the sphere, and the conic-interpolation extension they induce.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{UnitVector, TAU_ISO, TAU_MEMBER};
use crate::linalg::{dot, from_columns, norm};
use crate::sphere::SampleSet;

/// Singular-value cutoff for the clique Gram solves.
pub const GRAM_CUTOFF: f64 = 1e-10;

/// An anchor direction `beta` and its prescribed image `Γ(beta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub beta: UnitVector,
    pub image: UnitVector,
}

impl Anchor {
    pub fn new(beta: UnitVector, image: UnitVector) -> Self {
        Self { beta, image }
    }

    /// `beta^T beta' - image^T image'`.
    pub fn gap(&self, other: &Anchor) -> f64 {
        dot(&self.beta, &other.beta) - dot(&self.image, &other.image)
    }

    pub fn is_isometric(&self, other: &Anchor) -> bool {
        self.gap(other).abs() <= TAU_ISO
    }
}

/// A pairwise-isometric anchor subset with its precomputed pseudo-inverse.
#[derive(Debug, Clone)]
pub struct Clique {
    members: Vec<usize>,
    // |J| x m, row-major
    pinv: Vec<Vec<f64>>,
}

impl Clique {
    pub fn members(&self) -> &[usize] {
        &self.members
    }
}

/// Anchors plus every maximal isometric clique of size at most `m`,
/// in lexicographic order of anchor indices.
#[derive(Debug, Clone)]
pub struct IsometricCover {
    anchors: Vec<Anchor>,
    subsets: Vec<Clique>,
}

impl IsometricCover {
    /// Enumerates cliques without checking coverage.
    pub fn from_anchors(anchors: Vec<Anchor>) -> Result<Self> {
        let m = anchors
            .first()
            .map(|a| a.beta.dim())
            .ok_or_else(|| Error::InvalidSpec("at least one anchor is required".into()))?;
        let n = anchors[0].image.dim();
        for a in &anchors {
            if a.beta.dim() != m {
                return Err(Error::DimensionMismatch { expected: m, got: a.beta.dim() });
            }
            if a.image.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: a.image.dim() });
            }
        }
        for i in 0..anchors.len() {
            for j in i + 1..anchors.len() {
                let d = crate::linalg::sub(&anchors[i].beta, &anchors[j].beta);
                if norm(&d) <= crate::geometry::TAU_UNIT {
                    return Err(Error::InvalidSpec(format!("anchors {i} and {j} coincide")));
                }
            }
        }
        let subsets = enumerate_cliques(&anchors, m)
            .into_iter()
            .map(|members| {
                let cols: Vec<Vec<f64>> = members.iter().map(|&i| anchors[i].beta.to_vec()).collect();
                let b = from_columns(&cols, m);
                let p = b.pseudo_inverse(GRAM_CUTOFF).expect("non-negative cutoff");
                let pinv = (0..p.nrows()).map(|r| (0..m).map(|c| p[(r, c)]).collect()).collect();
                Clique { members, pinv }
            })
            .collect();
        Ok(Self { anchors, subsets })
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn subsets(&self) -> &[Clique] {
        &self.subsets
    }

    pub fn m(&self) -> usize {
        self.anchors[0].beta.dim()
    }

    pub fn n(&self) -> usize {
        self.anchors[0].image.dim()
    }

    /// Conic coefficients of `beta` over clique `k`, if `beta` lies in its cone.
    /// Slightly negative coefficients (down to `-TAU_MEMBER`) are clamped to 0.
    pub fn coefficients(&self, k: usize, beta: &[f64]) -> Option<Vec<f64>> {
        let clique = &self.subsets[k];
        let mut eps: Vec<f64> = clique.pinv.iter().map(|row| dot(row, beta)).collect();
        if eps.iter().any(|&e| e < -TAU_MEMBER) {
            return None;
        }
        eps.iter_mut().for_each(|e| *e = e.max(0.0));
        let mut residual = beta.to_vec();
        for (&i, &e) in clique.members.iter().zip(&eps) {
            for (r, b) in residual.iter_mut().zip(self.anchors[i].beta.iter()) {
                *r -= e * b;
            }
        }
        (norm(&residual) <= TAU_ISO).then_some(eps)
    }

    /// First clique (in lexicographic order) whose cone contains `beta`.
    pub fn locate(&self, beta: &[f64]) -> Option<(usize, Vec<f64>)> {
        (0..self.subsets.len()).find_map(|k| self.coefficients(k, beta).map(|e| (k, e)))
    }

    /// Every clique whose cone contains `beta`.
    pub fn covering(&self, beta: &[f64]) -> Vec<(usize, Vec<f64>)> {
        (0..self.subsets.len())
            .filter_map(|k| self.coefficients(k, beta).map(|e| (k, e)))
            .collect()
    }

    /// `sum_i eps_i g_i` over clique `k`, without renormalization.
    pub fn combine(&self, k: usize, eps: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for (&i, &e) in self.subsets[k].members.iter().zip(eps) {
            for (o, g) in out.iter_mut().zip(self.anchors[i].image.iter()) {
                *o += e * g;
            }
        }
        out
    }

    /// The conic-interpolation extension at `beta`.
    pub fn extend(&self, beta: &[f64]) -> Result<UnitVector> {
        let (k, eps) = self.locate(beta).ok_or_else(|| Error::Coverage { beta: beta.to_vec() })?;
        UnitVector::normalized(self.combine(k, &eps)).map_err(|_| Error::Coverage { beta: beta.to_vec() })
    }

    /// Sampled directions not contained in any clique cone.
    pub fn uncovered(&self, samples: &SampleSet) -> Vec<Vec<f64>> {
        use rayon::prelude::*;
        samples
            .points()
            .par_iter()
            .filter(|b| self.locate(b).is_none())
            .map(|b| b.to_vec())
            .collect()
    }
}

/// Cliques of the isometric-pair graph with at most `max_size` members that
/// are not contained in a larger such clique, in lexicographic order.
fn enumerate_cliques(anchors: &[Anchor], max_size: usize) -> Vec<Vec<usize>> {
    let k = anchors.len();
    let adj: Vec<Vec<bool>> = (0..k)
        .map(|i| (0..k).map(|j| i != j && anchors[i].is_isometric(&anchors[j])).collect())
        .collect();
    let mut all = Vec::new();
    let mut current = Vec::new();
    fn grow(start: usize, current: &mut Vec<usize>, adj: &[Vec<bool>], max: usize, out: &mut Vec<Vec<usize>>) {
        for v in start..adj.len() {
            if current.iter().all(|&u| adj[u][v]) {
                current.push(v);
                out.push(current.clone());
                if current.len() < max {
                    grow(v + 1, current, adj, max, out);
                }
                current.pop();
            }
        }
    }
    grow(0, &mut current, &adj, max_size, &mut all);
    let extendable = |c: &Vec<usize>| {
        c.len() < max_size && (0..k).any(|v| !c.contains(&v) && c.iter().all(|&u| adj[u][v]))
    };
    all.into_iter().filter(|c| !extendable(c)).collect()
}

/// Builds the cover and checks that every sampled direction lies in the cone
/// of some isometric clique.
pub fn build_cover(anchors: Vec<Anchor>, samples: &SampleSet) -> Result<IsometricCover> {
    let cover = IsometricCover::from_anchors(anchors)?;
    if samples.dim() != cover.m() {
        return Err(Error::DimensionMismatch { expected: cover.m(), got: samples.dim() });
    }
    let witnesses = cover.uncovered(samples);
    if witnesses.is_empty() {
        Ok(cover)
    } else {
        Err(Error::CoverIncomplete { witnesses })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(dim: usize, i: usize, sign: f64) -> UnitVector {
        let mut v = vec![0.0; dim];
        v[i] = sign;
        UnitVector::new(v).unwrap()
    }

    fn abs_anchors() -> Vec<Anchor> {
        vec![
            Anchor::new(e(2, 0, 1.0), e(2, 0, 1.0)),
            Anchor::new(e(2, 1, 1.0), e(2, 1, 1.0)),
            Anchor::new(e(2, 0, -1.0), e(2, 0, 1.0)),
            Anchor::new(e(2, 1, -1.0), e(2, 1, 1.0)),
        ]
    }

    #[test]
    fn orthant_cliques_for_componentwise_abs() {
        let cover = build_cover(abs_anchors(), &SampleSet::angular_grid(720)).unwrap();
        let sets: Vec<&[usize]> = cover.subsets().iter().map(Clique::members).collect();
        assert_eq!(sets, vec![&[0, 1][..], &[0, 3], &[1, 2], &[2, 3]]);
        let g = cover.extend(&[-0.6, 0.8]).unwrap();
        assert!((g[0] - 0.6).abs() < 1e-12 && (g[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn non_isometric_anchors_leave_gaps() {
        // constant image: distinct anchors are never isometric
        let anchors = vec![
            Anchor::new(e(2, 0, 1.0), e(2, 0, 1.0)),
            Anchor::new(e(2, 0, -1.0), e(2, 0, 1.0)),
        ];
        match build_cover(anchors, &SampleSet::angular_grid(64)) {
            Err(Error::CoverIncomplete { witnesses }) => {
                assert!(witnesses.iter().any(|w| w[0].abs() < 1e-12 && (w[1] - 1.0).abs() < 1e-12));
            }
            other => panic!("expected incomplete cover, got {other:?}"),
        }
    }

    #[test]
    fn coinciding_anchors_are_rejected() {
        let a = Anchor::new(e(2, 0, 1.0), e(2, 0, 1.0));
        assert!(IsometricCover::from_anchors(vec![a.clone(), a]).is_err());
    }

    #[test]
    fn clique_size_is_capped_by_m() {
        // identity on ±e1 in m = 1: the pair is isometric but exceeds |J| <= m
        let anchors = vec![
            Anchor::new(e(1, 0, 1.0), e(1, 0, 1.0)),
            Anchor::new(e(1, 0, -1.0), e(1, 0, -1.0)),
        ];
        let cover = IsometricCover::from_anchors(anchors).unwrap();
        assert!(cover.subsets().iter().all(|c| c.members().len() == 1));
        assert_eq!(cover.subsets().len(), 2);
    }
}
