//! The relaxation polytope `{ eᵀx = s, 0 ≤ x ≤ e, A·x ≤ b }`, optionally with
//! some coordinates pinned to 0 or 1, and its linear maximization oracle.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::instance::{Constraints, Instance};
use crate::simplex::{BoundedLp, LpError};

/// Bound state of one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pin {
    #[default]
    Free,
    Zero,
    One,
}

impl Pin {
    /// The pin seen from the complementary problem, where `y = e - x`.
    pub fn flipped(self) -> Pin {
        match self {
            Pin::Free => Pin::Free,
            Pin::Zero => Pin::One,
            Pin::One => Pin::Zero,
        }
    }

    fn bounds(self) -> (f64, f64) {
        match self {
            Pin::Free => (0.0, 1.0),
            Pin::Zero => (0.0, 0.0),
            Pin::One => (1.0, 1.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Polytope {
    n: usize,
    s: usize,
    constraints: Option<Constraints>,
    pins: Vec<Pin>,
    lp: Option<BoundedLp>,
    tie_break: Vec<f64>,
}

impl Polytope {
    /// Fails with [`Error::Infeasible`] when the polytope is empty.
    pub fn new(n: usize, s: usize, constraints: Option<Constraints>, pins: Option<&[Pin]>) -> Result<Self> {
        if s > n {
            return Err(Error::InvalidInput(format!("s = {s} exceeds n = {n}")));
        }
        let pins = match pins {
            Some(p) if p.len() != n => {
                return Err(Error::InvalidInput(format!("{} pins for {n} variables", p.len())))
            }
            Some(p) => p.to_vec(),
            None => vec![Pin::Free; n],
        };
        if let Some(c) = &constraints {
            if c.cols() != n {
                return Err(Error::InvalidInput("constraint width differs from n".into()));
            }
        }
        let lp = constraints.as_ref().map(|c| build_lp(n, s, c, &pins));
        // Prefer low indices among tied optimal vertices.
        let tie_break = (0..n).map(|j| (n - j) as f64 / n as f64).collect();
        let poly = Polytope { n, s, constraints, pins, lp, tie_break };
        poly.check_nonempty()?;
        Ok(poly)
    }

    pub fn for_instance(inst: &Instance, pins: Option<&[Pin]>) -> Result<Self> {
        Polytope::new(inst.n(), inst.s(), inst.constraints().cloned(), pins)
    }

    fn check_nonempty(&self) -> Result<()> {
        match &self.lp {
            None => {
                let ones = self.pins.iter().filter(|&&p| p == Pin::One).count();
                let free = self.pins.iter().filter(|&&p| p == Pin::Free).count();
                if ones <= self.s && self.s <= ones + free {
                    Ok(())
                } else {
                    Err(Error::Infeasible)
                }
            }
            Some(lp) => lp.feasible_point().map(|_| ()).map_err(lp_error),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn pins(&self) -> &[Pin] {
        &self.pins
    }

    pub fn constraints(&self) -> Option<&Constraints> {
        self.constraints.as_ref()
    }

    /// Same polytope with coordinate `j` pinned; `Err(Infeasible)` when empty.
    pub fn with_pin(&self, j: usize, pin: Pin) -> Result<Polytope> {
        let mut pins = self.pins.clone();
        pins[j] = pin;
        Polytope::new(self.n, self.s, self.constraints.clone(), Some(&pins))
    }

    /// A vertex maximizing `cᵀx`. Ties go to vertices using lower indices.
    pub fn lp_max(&self, c: &[f64]) -> Vec<f64> {
        assert_eq!(c.len(), self.n);
        match &self.lp {
            None => self.top_s(c),
            Some(lp) => {
                let mut full = c.to_vec();
                full.resize(lp.cols, 0.0);
                let mut x = lp
                    .maximize(&full, Some(&self.tie_break))
                    .expect("feasibility was established at construction and the box is bounded");
                x.truncate(self.n);
                x
            }
        }
    }

    /// Constraint-free oracle: pinned ones, then the largest free entries.
    fn top_s(&self, c: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        let mut need = self.s;
        for (j, p) in self.pins.iter().enumerate() {
            if *p == Pin::One {
                x[j] = 1.0;
                need -= 1;
            }
        }
        let mut free: Vec<usize> = (0..self.n).filter(|&j| self.pins[j] == Pin::Free).collect();
        // Stable: equal entries keep ascending index order.
        free.sort_by(|&a, &b| c[b].total_cmp(&c[a]));
        for &j in free.iter().take(need) {
            x[j] = 1.0;
        }
        x
    }

    /// Reference oracle through the simplex code even without side constraints.
    pub fn lp_max_simplex(&self, c: &[f64]) -> Vec<f64> {
        let empty = Constraints::new(crate::linalg::Matrix::zeros(0, self.n), Vec::new()).unwrap();
        let cons = self.constraints.clone().unwrap_or(empty);
        let lp = build_lp(self.n, self.s, &cons, &self.pins);
        let mut full = c.to_vec();
        full.resize(lp.cols, 0.0);
        let mut x = lp.maximize(&full, Some(&self.tie_break)).expect("nonempty polytope");
        x.truncate(self.n);
        x
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        if x.len() != self.n {
            return false;
        }
        let sum: f64 = x.iter().sum();
        if (sum - self.s as f64).abs() > slack {
            return false;
        }
        for (v, p) in x.iter().zip(&self.pins) {
            let (lo, hi) = p.bounds();
            if *v < lo - slack || *v > hi + slack {
                return false;
            }
        }
        self.constraints.as_ref().map_or(true, |c| c.satisfied_by(x, slack))
    }

    /// Distinct vertices maximizing and minimizing each coordinate; their
    /// average has every coordinate strictly inside `(0, 1)` unless the
    /// polytope forces it to a bound.
    pub fn spread_vertices(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        let mut c = vec![0.0; self.n];
        for j in 0..self.n {
            for sign in [1.0, -1.0] {
                c[j] = sign;
                let v = self.lp_max(&c);
                if !out.iter().any(|w| w == &v) {
                    out.push(v);
                }
            }
            c[j] = 0.0;
        }
        out
    }
}

fn build_lp(n: usize, s: usize, cons: &Constraints, pins: &[Pin]) -> BoundedLp {
    let m = cons.rows();
    let cols = n + m;
    let rows = m + 1;
    let mut a = vec![0.0; rows * cols];
    let mut b = Vec::with_capacity(rows);
    for j in 0..n {
        a[j] = 1.0;
    }
    b.push(s as f64);
    for i in 0..m {
        let r = (i + 1) * cols;
        a[r..r + n].copy_from_slice(cons.a().row(i));
        a[r + n + i] = 1.0;
        b.push(cons.b()[i]);
    }
    let mut lower = Vec::with_capacity(cols);
    let mut upper = Vec::with_capacity(cols);
    for p in pins {
        let (lo, hi) = p.bounds();
        lower.push(lo);
        upper.push(hi);
    }
    lower.extend(core::iter::repeat(0.0).take(m));
    upper.extend(core::iter::repeat(f64::INFINITY).take(m));
    BoundedLp { rows, cols, a, b, lower, upper }
}

fn lp_error(e: LpError) -> Error {
    match e {
        LpError::Infeasible => Error::Infeasible,
        LpError::Unbounded => Error::Numerical("bounded LP reported unbounded".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    #[test]
    fn top_s_fast_path() {
        let p = Polytope::new(4, 2, None, None).unwrap();
        assert_eq!(p.lp_max(&[3.0, 1.0, 2.0, 0.0]), vec![1.0, 0.0, 1.0, 0.0]);
        // Degenerate objective: lowest indices.
        assert_eq!(p.lp_max(&[0.0; 4]), vec![1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn constrained_tie_prefers_low_indices() {
        let cons = Constraints::new(Matrix::from_rows(&[&[0.0, 1.0, 1.0]]).unwrap(), vec![1.0]).unwrap();
        let p = Polytope::new(3, 2, Some(cons), None).unwrap();
        assert_eq!(p.lp_max(&[0.0, 1.0, 1.0]), vec![1.0, 1.0, 0.0]);
        let zero = p.lp_max(&[0.0; 3]);
        assert_eq!(zero, p.lp_max(&[0.0; 3]));
        assert!(p.contains(&zero, 1e-12));
    }

    #[test]
    fn pins_respected() {
        let p = Polytope::new(4, 2, None, Some(&[Pin::One, Pin::Zero, Pin::Free, Pin::Free])).unwrap();
        assert_eq!(p.lp_max(&[0.0, 5.0, 1.0, 2.0]), vec![1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            Polytope::new(3, 1, None, Some(&[Pin::One, Pin::One, Pin::Free])),
            Err(Error::Infeasible)
        ));
    }

    #[test]
    fn empty_polytope_rejected() {
        let cons = Constraints::new(Matrix::from_rows(&[&[1.0, 1.0, 1.0]]).unwrap(), vec![1.0]).unwrap();
        assert!(matches!(Polytope::new(3, 2, Some(cons), None), Err(Error::Infeasible)));
    }

    #[test]
    fn fast_path_matches_simplex() {
        let p = Polytope::new(5, 3, None, None).unwrap();
        let c = [0.3, -1.0, 2.5, 0.3, 1.0];
        let fast = p.lp_max(&c);
        let slow = p.lp_max_simplex(&c);
        let dot = |x: &[f64]| x.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
        assert!((dot(&fast) - dot(&slow)).abs() < 1e-12);
    }
}
