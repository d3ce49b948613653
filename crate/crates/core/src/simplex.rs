//! Dense bounded-variable primal simplex on an explicit tableau.
//!
//! Solves `max cᵀx` subject to `A·x = b`, `l ≤ x ≤ u` (upper bounds may be
//! infinite) with Bland's rule throughout, so degenerate problems cannot
//! cycle. A secondary objective can be optimized over the optimal face,
//! which gives a deterministic choice among tied optimal vertices.

use alloc::vec;
use alloc::vec::Vec;

use crate::tol::LP_PIVOT;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpError {
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic,
    Lower,
    Upper,
}

/// An equality-form LP with bounded variables.
#[derive(Debug, Clone)]
pub(crate) struct BoundedLp {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows × cols` equality matrix.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

struct Tableau {
    rows: usize,
    cols: usize,
    t: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    status: Vec<Status>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.cols + j]
    }

    fn value(&self, j: usize) -> f64 {
        match self.status[j] {
            Status::Lower => self.lower[j],
            Status::Upper => self.upper[j],
            Status::Basic => {
                let r = self.basis.iter().position(|&k| k == j).unwrap();
                self.beta[r]
            }
        }
    }

    fn reduced_costs(&self, c: &[f64]) -> Vec<f64> {
        let mut d = c.to_vec();
        for (i, &k) in self.basis.iter().enumerate() {
            let ck = c[k];
            if ck == 0.0 {
                continue;
            }
            let row = &self.t[i * self.cols..(i + 1) * self.cols];
            for (dj, &tij) in d.iter_mut().zip(row) {
                *dj -= ck * tij;
            }
        }
        d
    }

    /// Runs Bland-rule iterations for objective `c`. When `face` is given,
    /// only columns whose reduced cost for that objective is zero may enter.
    fn optimize(&mut self, c: &[f64], face: Option<&[f64]>) -> Result<(), LpError> {
        let max_iter = 50 * (self.rows + self.cols) + 1000;
        for _ in 0..max_iter {
            let d = self.reduced_costs(c);
            let face_d = face.map(|f| self.reduced_costs(f));
            let mut entering = None;
            for j in 0..self.cols {
                if self.upper[j] - self.lower[j] <= 0.0 {
                    continue;
                }
                if let Some(fd) = &face_d {
                    if fd[j].abs() > LP_PIVOT {
                        continue;
                    }
                }
                let dir = match self.status[j] {
                    Status::Lower if d[j] > LP_PIVOT => 1.0,
                    Status::Upper if d[j] < -LP_PIVOT => -1.0,
                    _ => continue,
                };
                entering = Some((j, dir));
                break;
            }
            let Some((j, dir)) = entering else {
                return Ok(());
            };
            self.step(j, dir)?;
        }
        // Bland's rule terminates; reaching this means the tolerances are
        // fighting each other. The current basis is still feasible.
        Ok(())
    }

    fn step(&mut self, j: usize, dir: f64) -> Result<(), LpError> {
        let mut theta = self.upper[j] - self.lower[j];
        let mut leave: Option<(usize, Status)> = None;
        for i in 0..self.rows {
            let alpha = self.at(i, j) * dir;
            let k = self.basis[i];
            let (limit, bound) = if alpha > LP_PIVOT {
                ((self.beta[i] - self.lower[k]) / alpha, Status::Lower)
            } else if alpha < -LP_PIVOT && self.upper[k].is_finite() {
                ((self.upper[k] - self.beta[i]) / -alpha, Status::Upper)
            } else {
                continue;
            };
            let limit = limit.max(0.0);
            let better = match leave {
                _ if limit < theta => true,
                Some((r, _)) if limit == theta => k < self.basis[r],
                None if limit == theta => true,
                _ => false,
            };
            if better {
                theta = limit;
                leave = Some((i, bound));
            }
        }
        if !theta.is_finite() {
            return Err(LpError::Unbounded);
        }
        for i in 0..self.rows {
            self.beta[i] -= theta * dir * self.at(i, j);
        }
        match leave {
            None => {
                self.status[j] = if dir > 0.0 { Status::Upper } else { Status::Lower };
            }
            Some((r, bound)) => {
                let k = self.basis[r];
                let entering_value =
                    if dir > 0.0 { self.lower[j] + theta } else { self.upper[j] - theta };
                self.status[k] = bound;
                self.pivot(r, j);
                self.beta[r] = entering_value;
                self.basis[r] = j;
                self.status[j] = Status::Basic;
            }
        }
        Ok(())
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let p = self.at(r, j);
        for v in &mut self.t[r * cols..(r + 1) * cols] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.t[r * cols..(r + 1) * cols].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.at(i, j);
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * cols..(i + 1) * cols];
            for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[j] = 0.0;
        }
    }
}

impl BoundedLp {
    /// Optimal vertex for `c`; ties resolved by maximizing `secondary` over
    /// the optimal face.
    pub fn maximize(&self, c: &[f64], secondary: Option<&[f64]>) -> Result<Vec<f64>, LpError> {
        let mut tab = self.phase_one()?;
        let total = tab.cols;
        let pad = |v: &[f64]| {
            let mut full = vec![0.0; total];
            full[..v.len()].copy_from_slice(v);
            full
        };
        let c_full = pad(c);
        tab.optimize(&c_full, None)?;
        if let Some(w) = secondary {
            tab.optimize(&pad(w), Some(&c_full))?;
        }
        Ok((0..self.cols).map(|j| self.clean(j, tab.value(j))).collect())
    }

    /// Any vertex, or `Infeasible`.
    pub fn feasible_point(&self) -> Result<Vec<f64>, LpError> {
        let tab = self.phase_one()?;
        Ok((0..self.cols).map(|j| self.clean(j, tab.value(j))).collect())
    }

    fn clean(&self, j: usize, v: f64) -> f64 {
        if (v - self.lower[j]).abs() <= 1e-12 {
            self.lower[j]
        } else if (v - self.upper[j]).abs() <= 1e-12 {
            self.upper[j]
        } else {
            v
        }
    }

    /// Feasible basis from an artificial start; artificials end pinned at 0.
    fn phase_one(&self) -> Result<Tableau, LpError> {
        let (m, n) = (self.rows, self.cols);
        let total = n + m;
        let mut t = vec![0.0; m * total];
        let mut beta = vec![0.0; m];
        for i in 0..m {
            let row = &self.a[i * n..(i + 1) * n];
            let resid = self.b[i] - row.iter().zip(&self.lower).map(|(a, l)| a * l).sum::<f64>();
            let sign = if resid < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                t[i * total + j] = sign * row[j];
            }
            t[i * total + n + i] = 1.0;
            beta[i] = sign * resid;
        }
        let mut lower = self.lower.clone();
        lower.extend(core::iter::repeat(0.0).take(m));
        let mut upper = self.upper.clone();
        upper.extend(core::iter::repeat(f64::INFINITY).take(m));
        let mut status = vec![Status::Lower; total];
        for i in 0..m {
            status[n + i] = Status::Basic;
        }
        let mut tab = Tableau {
            rows: m,
            cols: total,
            t,
            beta,
            basis: (n..total).collect(),
            status,
            lower,
            upper,
        };
        let mut cost = vec![0.0; total];
        for c in &mut cost[n..] {
            *c = -1.0;
        }
        tab.optimize(&cost, None)?;
        let infeasibility: f64 = (n..total).map(|j| tab.value(j)).sum();
        let scale = 1.0 + self.b.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if infeasibility > 1e-9 * scale {
            return Err(LpError::Infeasible);
        }
        for j in n..total {
            tab.upper[j] = 0.0;
            if tab.status[j] == Status::Basic {
                let r = tab.basis.iter().position(|&k| k == j).unwrap();
                tab.beta[r] = 0.0;
            } else {
                tab.status[j] = Status::Lower;
            }
        }
        Ok(tab)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // max x0 + x1  s.t. x0 + 2x1 + s = 4, x0 ≤ 3
        let lp = BoundedLp {
            rows: 1,
            cols: 3,
            a: vec![1.0, 2.0, 1.0],
            b: vec![4.0],
            lower: vec![0.0; 3],
            upper: vec![3.0, f64::INFINITY, f64::INFINITY],
        };
        let x = lp.maximize(&[1.0, 1.0, 0.0], None).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn infeasible_detected() {
        // x0 + x1 = 3 with both in [0, 1].
        let lp = BoundedLp { rows: 1, cols: 2, a: vec![1.0, 1.0], b: vec![3.0], lower: vec![0.0; 2], upper: vec![1.0; 2] };
        assert_eq!(lp.feasible_point().unwrap_err(), LpError::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let lp = BoundedLp {
            rows: 1,
            cols: 2,
            a: vec![1.0, -1.0],
            b: vec![0.0],
            lower: vec![0.0; 2],
            upper: vec![f64::INFINITY; 2],
        };
        assert_eq!(lp.maximize(&[1.0, 0.0], None).unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn secondary_objective_breaks_ties() {
        // x0 + x1 + x2 = 1 in [0,1]; c favours x1 and x2 equally.
        let lp = BoundedLp { rows: 1, cols: 3, a: vec![1.0; 3], b: vec![1.0], lower: vec![0.0; 3], upper: vec![1.0; 3] };
        let x = lp.maximize(&[0.0, 1.0, 1.0], Some(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(x, vec![0.0, 0.0, 1.0]);
        let x = lp.maximize(&[0.0, 1.0, 1.0], Some(&[0.0, 1.0, 0.0])).unwrap();
        assert_eq!(x, vec![0.0, 1.0, 0.0]);
    }
}
