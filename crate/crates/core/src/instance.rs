//! The problem datum: covariance, cardinality and optional side constraints.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, EigDecomp, Matrix, SymMatrix};
use crate::math::{exp, ln};
use crate::tol;

/// Side constraints `A·x ≤ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraints {
    a: Matrix,
    b: Vec<f64>,
}

impl Constraints {
    pub fn new(a: Matrix, b: Vec<f64>) -> Result<Self> {
        if a.rows() != b.len() {
            return Err(Error::InvalidInput(format!(
                "constraint matrix has {} rows but right-hand side has {} entries",
                a.rows(),
                b.len()
            )));
        }
        if !a.is_finite() || b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Constraints { a, b })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    /// Appends the rows of `other`.
    pub fn stacked(&self, other: &Constraints) -> Result<Constraints> {
        if self.cols() != other.cols() {
            return Err(Error::InvalidInput("constraint blocks differ in width".into()));
        }
        let mut data = self.a.as_slice().to_vec();
        data.extend_from_slice(other.a.as_slice());
        let mut b = self.b.clone();
        b.extend_from_slice(&other.b);
        Constraints::new(Matrix::from_vec(self.rows() + other.rows(), self.cols(), data)?, b)
    }

    /// `A·x - b`, one entry per row.
    pub fn residuals(&self, x: &[f64]) -> Vec<f64> {
        self.a.matvec(x).iter().zip(&self.b).map(|(ax, b)| ax - b).collect()
    }

    pub fn satisfied_by(&self, x: &[f64], slack: f64) -> bool {
        self.residuals(x).iter().all(|&r| r <= slack)
    }

    /// Whether the 0/1 indicator of `set` satisfies every row.
    pub fn satisfied_by_set(&self, set: &[usize], slack: f64) -> bool {
        (0..self.rows()).all(|i| {
            let row = self.a.row(i);
            set.iter().map(|&j| row[j]).sum::<f64>() <= self.b[i] + slack
        })
    }

    /// Keeps the listed columns; the right-hand side is unchanged, which is
    /// the restriction to `x_j = 0` for every dropped column.
    pub fn restrict(&self, keep: &[usize]) -> Constraints {
        Constraints { a: self.a.select_columns(keep), b: self.b.clone() }
    }
}

/// A validated CMESP instance.
///
/// The covariance is symmetric, positive semidefinite after clipping
/// rounding-level negative eigenvalues, and has numerical rank at least `s`.
#[derive(Debug, Clone)]
pub struct Instance {
    c: SymMatrix,
    s: usize,
    constraints: Option<Constraints>,
    eig: EigDecomp,
    rank: usize,
    clipped: usize,
}

impl Instance {
    pub fn new(c: SymMatrix, s: usize, constraints: Option<Constraints>) -> Result<Self> {
        let n = c.order();
        if s == 0 || s >= n {
            return Err(Error::InvalidInput(format!("cardinality s = {s} must satisfy 0 < s < n = {n}")));
        }
        if let Some(cons) = &constraints {
            if cons.cols() != n {
                return Err(Error::InvalidInput(format!(
                    "constraints have {} columns but the covariance has order {n}",
                    cons.cols()
                )));
            }
        }
        let mut eig = eig_sym(&c)?;
        let lmax = eig.values[0];
        let lmin = *eig.values.last().unwrap();
        if !(lmax > 0.0) || lmin < -tol::PSD_REPAIR * lmax {
            return Err(Error::NotPsd { lambda_min: lmin, lambda_max: lmax });
        }
        let clipped = eig.values.iter().filter(|&&l| l < 0.0).count();
        let c = if clipped > 0 {
            log::warn!("clipping {clipped} slightly negative covariance eigenvalue(s) to zero (smallest {lmin:e})");
            for l in eig.values.iter_mut() {
                if *l < 0.0 {
                    *l = 0.0;
                }
            }
            eig.reconstruct()
        } else {
            c
        };
        let rank = eig.values.iter().filter(|&&l| l > tol::RANK_RELATIVE * lmax).count();
        if rank < s {
            return Err(Error::RankDeficient { rank, s });
        }
        Ok(Instance { c, s, constraints, eig, rank, clipped })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.c.order()
    }

    #[inline]
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn covariance(&self) -> &SymMatrix {
        &self.c
    }

    pub fn constraints(&self) -> Option<&Constraints> {
        self.constraints.as_ref()
    }

    /// Eigendecomposition of the (repaired) covariance.
    pub fn spectrum(&self) -> &EigDecomp {
        &self.eig
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of negative eigenvalues clipped during validation.
    pub fn clipped_eigenvalues(&self) -> usize {
        self.clipped
    }

    /// `ldet C[S,S]`, or `-∞` when the principal submatrix is singular.
    pub fn subset_ldet(&self, set: &[usize]) -> f64 {
        crate::linalg::ldet_pd(&self.c.principal(set)).unwrap_or(f64::NEG_INFINITY)
    }

    pub fn is_feasible_set(&self, set: &[usize]) -> bool {
        set.len() == self.s
            && self.constraints.as_ref().map_or(true, |c| c.satisfied_by_set(set, tol::FEASIBILITY))
    }

    pub fn with_constraints(&self, constraints: Option<Constraints>) -> Result<Instance> {
        Instance::new(self.c.clone(), self.s, constraints)
    }

    pub fn with_s(&self, s: usize) -> Result<Instance> {
        Instance::new(self.c.clone(), s, self.constraints.clone())
    }

    /// The complementary instance `(C⁻¹, n - s, -A, b - A·e)` and the offset
    /// `ldet C`: any upper bound on the complementary optimum plus the
    /// offset bounds the optimum of `self`.
    pub fn complement(&self) -> Result<(Instance, f64)> {
        let lmax = self.eig.values[0];
        let lmin = *self.eig.values.last().unwrap();
        if !(lmin > tol::INVERTIBLE_RELATIVE * lmax) {
            return Err(Error::ComplementUnavailable);
        }
        let inverse = self.eig.reconstruct_with(|l| 1.0 / l);
        let offset: f64 = self.eig.values.iter().map(|&l| ln(l)).sum();
        let constraints = self
            .constraints
            .as_ref()
            .map(|cons| {
                let neg = Matrix::from_fn(cons.rows(), cons.cols(), |i, j| -cons.a[(i, j)]);
                let b = (0..cons.rows())
                    .map(|i| cons.b[i] - cons.a.row(i).iter().sum::<f64>())
                    .collect();
                Constraints::new(neg, b)
            })
            .transpose()?;
        let comp = Instance::new(inverse, self.n() - self.s, constraints)?;
        Ok((comp, offset))
    }

    /// Principal restriction to `keep`, with `s` unchanged.
    pub fn restrict(&self, keep: &[usize]) -> Result<Instance> {
        let constraints = self.constraints.as_ref().map(|c| c.restrict(keep));
        Instance::new(self.c.principal(keep), self.s, constraints)
    }
}

/// Strictly positive scaling vector Υ, kept together with `log Υ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingVector {
    gamma: Vec<f64>,
    log_gamma: Vec<f64>,
}

impl ScalingVector {
    pub fn ones(n: usize) -> Self {
        ScalingVector { gamma: alloc::vec![1.0; n], log_gamma: alloc::vec![0.0; n] }
    }

    pub fn uniform(n: usize, gamma: f64) -> Result<Self> {
        Self::from_gamma(alloc::vec![gamma; n])
    }

    pub fn from_gamma(gamma: Vec<f64>) -> Result<Self> {
        if gamma.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
            return Err(Error::InvalidInput("scaling entries must be positive and finite".into()));
        }
        let log_gamma = gamma.iter().map(|&g| ln(g)).collect();
        Ok(ScalingVector { gamma, log_gamma })
    }

    pub fn from_log(log_gamma: Vec<f64>) -> Result<Self> {
        let gamma: Vec<f64> = log_gamma.iter().map(|&t| exp(t)).collect();
        if gamma.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
            return Err(Error::InvalidInput("log scaling produces a non-positive or infinite entry".into()));
        }
        Ok(ScalingVector { gamma, log_gamma })
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn log(&self) -> &[f64] {
        &self.log_gamma
    }

    pub fn is_uniform(&self) -> bool {
        self.gamma.windows(2).all(|w| w[0] == w[1])
    }

    /// Entries at the listed positions.
    pub fn select(&self, keep: &[usize]) -> ScalingVector {
        ScalingVector {
            gamma: keep.iter().map(|&i| self.gamma[i]).collect(),
            log_gamma: keep.iter().map(|&i| self.log_gamma[i]).collect(),
        }
    }
}
