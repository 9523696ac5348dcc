//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! The instances this crate produces are tall and thin: thousands of sampled
//! inequalities over at most a few dozen variables. They are solved through
//! their dual, which has one row per variable and one column per inequality,
//! so the tableau stays small.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 200_000;

/// `min c^T u` subject to `A u = b`, `u >= 0`. `a` is stored by rows.
#[derive(Debug, Clone)]
pub struct StandardForm {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: Status,
    /// Primal point (meaningful when `Optimal`; the phase-one point when `Infeasible`).
    pub u: Vec<f64>,
    pub objective: f64,
    /// Equality-row multipliers `y` with `c - A^T y >= 0` at optimality.
    pub multipliers: Vec<f64>,
    /// Sum of artificial values at the end of phase one.
    pub infeasibility: f64,
    pub pivots: usize,
}

struct Tableau {
    rows: usize,
    structural: usize,
    stride: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    reduced: Vec<f64>,
    objective: f64,
    pivots: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.stride + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.stride + self.stride - 1]
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.structural
    }

    fn price(&mut self, costs: &[f64]) {
        let ncols = self.stride - 1;
        self.reduced.clear();
        self.reduced.extend_from_slice(costs);
        self.objective = 0.0;
        for i in 0..self.rows {
            let cb = costs[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.data[i * self.stride..(i + 1) * self.stride];
            for j in 0..ncols {
                self.reduced[j] -= cb * row[j];
            }
            self.objective += cb * row[ncols];
        }
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let stride = self.stride;
        let p = self.at(r, e);
        {
            let row = &mut self.data[r * stride..(r + 1) * stride];
            for v in row.iter_mut() {
                *v /= p;
            }
        }
        let pivot_row: Vec<f64> = self.data[r * stride..(r + 1) * stride].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * stride + e];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * stride..(i + 1) * stride];
            for (v, pr) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            row[e] = 0.0;
        }
        let f = self.reduced[e];
        if f != 0.0 {
            for (d, pr) in self.reduced.iter_mut().zip(&pivot_row) {
                *d -= f * pr;
            }
            self.reduced[e] = 0.0;
            self.objective += f * pivot_row[stride - 1];
        }
        self.basis[r] = e;
        self.pivots += 1;
    }

    /// Runs Bland's rule until optimal. Returns `false` on unboundedness.
    fn optimize(&mut self, allow_artificial: bool) -> Result<bool> {
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::Lp(format!("pivot limit {MAX_PIVOTS} exceeded")));
            }
            let ncols = if allow_artificial {
                self.stride - 1
            } else {
                self.structural
            };
            let Some(e) = (0..ncols).find(|&j| self.reduced[j] < -COST_EPS) else {
                return Ok(true);
            };
            // ratio test; basic artificials left at zero level leave first
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, e);
                let ratio = if !allow_artificial && self.is_artificial(self.basis[i]) {
                    if a.abs() <= PIVOT_EPS {
                        continue;
                    }
                    0.0
                } else {
                    if a <= PIVOT_EPS {
                        continue;
                    }
                    (self.rhs(i) / a).max(0.0)
                };
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                        if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = best else {
                return Ok(false);
            };
            self.pivot(r, e);
        }
    }

    fn primal(&self) -> Vec<f64> {
        let mut u = vec![0.0; self.structural];
        for i in 0..self.rows {
            let j = self.basis[i];
            if j < self.structural {
                u[j] = self.rhs(i).max(0.0);
            }
        }
        u
    }
}

/// Solves a standard-form LP with the two-phase method.
pub fn solve_standard(lp: &StandardForm) -> Result<Solution> {
    let rows = lp.b.len();
    let n = lp.c.len();
    if lp.a.len() != rows || lp.a.iter().any(|r| r.len() != n) {
        return Err(Error::Lp("inconsistent standard-form dimensions".into()));
    }
    let stride = n + rows + 1;
    let mut data = vec![0.0; rows * stride];
    let mut sign = vec![1.0; rows];
    for i in 0..rows {
        let s = if lp.b[i] < 0.0 { -1.0 } else { 1.0 };
        sign[i] = s;
        let row = &mut data[i * stride..(i + 1) * stride];
        for j in 0..n {
            row[j] = s * lp.a[i][j];
        }
        row[n + i] = 1.0;
        row[stride - 1] = s * lp.b[i];
    }
    let mut t = Tableau {
        rows,
        structural: n,
        stride,
        data,
        basis: (n..n + rows).collect(),
        reduced: Vec::with_capacity(n + rows),
        objective: 0.0,
        pivots: 0,
    };

    let mut phase_one = vec![0.0; n + rows];
    phase_one[n..].iter_mut().for_each(|c| *c = 1.0);
    t.price(&phase_one);
    t.optimize(true)?;
    let infeasibility = t.objective.max(0.0);
    let scale = lp.b.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    if infeasibility > 1e-9 * scale {
        return Ok(Solution {
            status: Status::Infeasible,
            u: t.primal(),
            objective: f64::NAN,
            multipliers: vec![0.0; rows],
            infeasibility,
            pivots: t.pivots,
        });
    }

    let mut phase_two = lp.c.clone();
    phase_two.extend(std::iter::repeat_n(0.0, rows));
    t.price(&phase_two);
    let bounded = t.optimize(false)?;
    let u = t.primal();
    let multipliers = (0..rows).map(|i| -sign[i] * t.reduced[n + i]).collect();
    Ok(Solution {
        status: if bounded { Status::Optimal } else { Status::Unbounded },
        objective: crate::linalg::dot(&lp.c, &u),
        u,
        multipliers,
        infeasibility,
        pivots: t.pivots,
    })
}

/// Outcome of [`maximize`].
#[derive(Debug, Clone)]
pub struct InequalitySolution {
    pub w: Vec<f64>,
    pub value: f64,
    pub pivots: usize,
}

/// `max c^T w` subject to `rows[k]^T w <= rhs[k]` with `w` free, solved via
/// the dual `min rhs^T u`, `A^T u = c`, `u >= 0`.
pub fn maximize(c: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> Result<InequalitySolution> {
    let d = c.len();
    if rows.len() != rhs.len() || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Lp("inconsistent inequality-form dimensions".into()));
    }
    let a: Vec<Vec<f64>> = (0..d).map(|i| rows.iter().map(|r| r[i]).collect()).collect();
    let dual = StandardForm {
        a,
        b: c.to_vec(),
        c: rhs.to_vec(),
    };
    let sol = solve_standard(&dual)?;
    match sol.status {
        Status::Optimal => {
            let w = sol.multipliers;
            Ok(InequalitySolution {
                value: crate::linalg::dot(c, &w),
                w,
                pivots: sol.pivots,
            })
        }
        Status::Infeasible => Err(Error::Lp("primal unbounded or infeasible".into())),
        Status::Unbounded => Err(Error::Lp("primal infeasible".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let rows = vec![
            vec![1.0, 0.0],
            vec![0.0, 2.0],
            vec![3.0, 2.0],
            vec![-1.0, 0.0],
            vec![0.0, -1.0],
        ];
        let sol = maximize(&[3.0, 5.0], &rows, &[4.0, 12.0, 18.0, 0.0, 0.0]).unwrap();
        assert!((sol.value - 36.0).abs() < 1e-9);
        assert!((sol.w[0] - 2.0).abs() < 1e-9 && (sol.w[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn free_variables_can_go_negative() {
        // max -x s.t. -x <= 3  i.e. x >= -3 -> x = -3
        let sol = maximize(&[-1.0], &[vec![1.0], vec![-1.0]], &[5.0, 3.0]).unwrap();
        assert!((sol.w[0] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        // x <= -1 and -x <= -1
        let err = maximize(&[1.0], &[vec![1.0], vec![-1.0]], &[-1.0, -1.0]);
        assert!(err.is_err());
        let err = maximize(&[1.0], &[vec![-1.0]], &[0.0]);
        assert!(err.is_err());
    }

    #[test]
    fn standard_form_redundant_rows() {
        // duplicated equality row leaves an artificial basic at zero
        let lp = StandardForm {
            a: vec![vec![1.0, 1.0, 0.0], vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]],
            b: vec![1.0, 1.0, 1.0],
            c: vec![1.0, 2.0, 0.0],
        };
        let sol = solve_standard(&lp).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-12);
        assert!((sol.u[0] - 1.0).abs() < 1e-12 && (sol.u[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example cycles under the largest-coefficient rule
        let lp = StandardForm {
            a: vec![
                vec![0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
                vec![0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            ],
            b: vec![0.0, 0.0, 1.0],
            c: vec![-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0],
        };
        let sol = solve_standard(&lp).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.objective + 0.05).abs() < 1e-9);
    }
}
