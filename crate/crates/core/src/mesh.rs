//! Triangle meshes of the `C_Γ` and Q boundaries on 3-dimensional affine slices.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{QFreeSet, SplitPoint};
use crate::linalg::{from_rows, norm, rank};

/// `u ↦ matrix·u + offset`, `matrix` being `(n+m) x 3` row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embed {
    pub matrix: Vec<[f64; 3]>,
    pub offset: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    pub embed: Embed,
    pub bounds: Bounds,
    pub resolution: [usize; 3],
}

impl SliceSpec {
    /// The first three stacked coordinates free on `[-2, 2]³`, the last one at 1
    /// when there are more than three.
    pub fn default_for(n: usize, m: usize) -> Result<Self> {
        let d = n + m;
        if d < 3 {
            return Err(Error::InvalidSlice(format!("a 3-dimensional slice needs n + m >= 3, got {d}")));
        }
        let matrix = (0..d).map(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 })).collect();
        let mut offset = vec![0.0; d];
        if d > 3 {
            offset[d - 1] = 1.0;
        }
        Ok(Self {
            embed: Embed { matrix, offset },
            bounds: Bounds { lo: [-2.0; 3], hi: [2.0; 3] },
            resolution: [41; 3],
        })
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.embed.matrix.len() != d || self.embed.offset.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.embed.matrix.len() });
        }
        let rows: Vec<Vec<f64>> = self.embed.matrix.iter().map(|r| r.to_vec()).collect();
        let r = rank(&from_rows(&rows), 1e-12);
        if r != 3 {
            return Err(Error::DegenerateEmbed { rank: r });
        }
        if self.resolution.iter().any(|&k| k < 2) {
            return Err(Error::InvalidSlice("resolution must be at least 2 per axis".into()));
        }
        if (0..3).any(|i| !(self.bounds.hi[i] > self.bounds.lo[i])) {
            return Err(Error::InvalidSlice("bounds must satisfy lo < hi".into()));
        }
        Ok(())
    }

    /// Slice coordinates of grid node `(i, j, k)`.
    pub fn node(&self, idx: [usize; 3]) -> [f64; 3] {
        std::array::from_fn(|a| {
            let f = idx[a] as f64 / (self.resolution[a] - 1) as f64;
            self.bounds.lo[a] + f * (self.bounds.hi[a] - self.bounds.lo[a])
        })
    }

    pub fn embed_point(&self, u: [f64; 3], n: usize) -> SplitPoint {
        let s: Vec<f64> = self
            .embed
            .matrix
            .iter()
            .zip(&self.embed.offset)
            .map(|(r, o)| r[0] * u[0] + r[1] * u[1] + r[2] * u[2] + o)
            .collect();
        SplitPoint::from_stacked(&s, n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    pub label: String,
}

pub const C_BOUNDARY: &str = "C_boundary";
pub const Q_BOUNDARY: &str = "Q_boundary";

// cube corner offsets; corner c has bits (i, j, k)
const CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

// six tetrahedra around the 0-6 diagonal
const TETS: [[usize; 4]; 6] = [
    [0, 5, 1, 6],
    [0, 1, 2, 6],
    [0, 2, 3, 6],
    [0, 3, 7, 6],
    [0, 7, 4, 6],
    [0, 4, 5, 6],
];

/// Zero level set of values sampled on the slice grid, by marching tetrahedra.
/// Negative values are outside; cells whose values are all zero emit nothing.
pub fn extract_level_set(spec: &SliceSpec, values: &[f64], label: &str) -> Mesh {
    let [nx, ny, nz] = spec.resolution;
    let id = |p: [usize; 3]| p[0] + nx * (p[1] + ny * p[2]);
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut edge_vertex: HashMap<(usize, usize), usize> = HashMap::new();
    let mut vertex_on = |a: usize, b: usize, pa: [usize; 3], pb: [usize; 3], vertices: &mut Vec<[f64; 3]>| {
        let key = (a.min(b), a.max(b));
        *edge_vertex.entry(key).or_insert_with(|| {
            let (va, vb) = (values[a], values[b]);
            let f = if va == vb { 0.5 } else { va / (va - vb) };
            let (ua, ub) = (spec.node(pa), spec.node(pb));
            vertices.push(std::array::from_fn(|k| ua[k] + f * (ub[k] - ua[k])));
            vertices.len() - 1
        })
    };
    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let pos: [[usize; 3]; 8] = CORNERS.map(|c| [i + c[0], j + c[1], k + c[2]]);
                let ids = pos.map(id);
                if ids.iter().all(|&v| values[v] == 0.0) {
                    continue;
                }
                for tet in TETS {
                    let inside: Vec<usize> = tet.into_iter().filter(|&c| values[ids[c]] >= 0.0).collect();
                    let outside: Vec<usize> = tet.into_iter().filter(|&c| values[ids[c]] < 0.0).collect();
                    let mut cut = |a: usize, b: usize, vs: &mut Vec<[f64; 3]>| vertex_on(ids[a], ids[b], pos[a], pos[b], vs);
                    match (inside.len(), outside.len()) {
                        (1, 3) | (3, 1) => {
                            let (lone, rest) = if inside.len() == 1 { (inside[0], &outside) } else { (outside[0], &inside) };
                            let tri = [cut(lone, rest[0], &mut vertices), cut(lone, rest[1], &mut vertices), cut(lone, rest[2], &mut vertices)];
                            push_face(&mut faces, tri);
                        }
                        (2, 2) => {
                            let (a, b, c, d) = (inside[0], inside[1], outside[0], outside[1]);
                            let q = [
                                cut(a, c, &mut vertices),
                                cut(a, d, &mut vertices),
                                cut(b, d, &mut vertices),
                                cut(b, c, &mut vertices),
                            ];
                            push_face(&mut faces, [q[0], q[1], q[2]]);
                            push_face(&mut faces, [q[0], q[2], q[3]]);
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    Mesh { vertices, faces, label: label.to_string() }
}

fn push_face(faces: &mut Vec<[usize; 3]>, f: [usize; 3]) {
    // skip triangles collapsed onto a shared grid node
    if f[0] != f[1] && f[1] != f[2] && f[0] != f[2] {
        faces.push(f);
    }
}

/// Meshes of `margin(C, ·) = 0` and `‖y‖ - ‖x‖ = 0` on the slice, in that order.
pub fn slice_mesh(c: &QFreeSet, spec: &SliceSpec) -> Result<[Mesh; 2]> {
    let (n, m) = (c.n(), c.m());
    spec.validate(n + m)?;
    let [nx, ny, nz] = spec.resolution;
    let nodes: Vec<SplitPoint> = (0..nx * ny * nz)
        .map(|v| spec.embed_point(spec.node([v % nx, (v / nx) % ny, v / (nx * ny)]), n))
        .collect();
    let margins: Vec<f64> = nodes.par_iter().map(|p| c.margin(p)).collect::<Result<_>>()?;
    let q: Vec<f64> = nodes.iter().map(|p| norm(&p.y) - norm(&p.x)).collect();
    Ok([extract_level_set(spec, &margins, C_BOUNDARY), extract_level_set(spec, &q, Q_BOUNDARY)])
}
