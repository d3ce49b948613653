//! Pointwise evaluation of the scaled BQP relaxation objective
//!
//! ```text
//! f(x, X; Υ) = ldet( (D C D) ∘ X + Diag(e - x) ) - 2 Σ xᵢ log γᵢ,   D = Diag(Υ)
//! ```
//!
//! over the lifted set `P(n, s) = { X - x xᵀ ⪰ 0, diag X = x, eᵀx = s,
//! X e = s x }`. Only evaluation and derivatives in `log Υ` are provided;
//! maximizing over `P(n, s)` needs a semidefinite solver.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::instance::{Constraints, ScalingVector};
use crate::linalg::{eig_sym, Cholesky, Matrix, SymMatrix};
use crate::linx::{hadamard_curvature, inverse_diagonal};
use crate::math::dot;
use crate::tol;

/// A point `(x, X)` of the lifted space.
#[derive(Debug, Clone, PartialEq)]
pub struct BqpPoint {
    pub x: Vec<f64>,
    pub xx: SymMatrix,
}

impl BqpPoint {
    pub fn new(x: Vec<f64>, xx: SymMatrix) -> Result<Self> {
        if x.len() != xx.order() {
            return Err(Error::InvalidInput("x and X have different dimensions".into()));
        }
        Ok(BqpPoint { x, xx })
    }

    /// The lift `(x, x xᵀ)` of a point.
    pub fn lift(x: &[f64]) -> Self {
        let n = x.len();
        let xx = SymMatrix::symmetrize(Matrix::from_fn(n, n, |i, j| x[i] * x[j]));
        BqpPoint { x: x.to_vec(), xx }
    }

    /// The lift of the 0/1 indicator of `set`.
    pub fn lift_set(n: usize, set: &[usize]) -> Self {
        let mut x = alloc::vec![0.0; n];
        for &i in set {
            x[i] = 1.0;
        }
        Self::lift(&x)
    }

    /// `Σ wₖ pₖ` for nonnegative weights summing to one.
    pub fn combination(points: &[BqpPoint], weights: &[f64]) -> Self {
        let n = points[0].x.len();
        let mut x = alloc::vec![0.0; n];
        let mut xx = Matrix::zeros(n, n);
        for (p, &w) in points.iter().zip(weights) {
            for (a, b) in x.iter_mut().zip(&p.x) {
                *a += w * b;
            }
            for (a, b) in xx.as_mut_slice().iter_mut().zip(p.xx.as_matrix().as_slice()) {
                *a += w * b;
            }
        }
        BqpPoint { x, xx: SymMatrix::symmetrize(xx) }
    }
}

/// A violated membership condition with its residual.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `λ_min(X - x xᵀ)` below `-10⁻⁸`.
    NotPsd { lambda_min: f64 },
    /// `max |diag X - x|`.
    Diagonal { residual: f64 },
    /// `|eᵀx - s|`.
    Cardinality { residual: f64 },
    /// `max |X e - s x|`.
    RowSums { residual: f64 },
    /// `max (A x - b)`.
    SideConstraints { residual: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotPsd { lambda_min } => write!(f, "X - x xᵀ not PSD (smallest eigenvalue {lambda_min:e})"),
            Violation::Diagonal { residual } => write!(f, "diag(X) differs from x by {residual:e}"),
            Violation::Cardinality { residual } => write!(f, "eᵀx differs from s by {residual:e}"),
            Violation::RowSums { residual } => write!(f, "X e differs from s x by {residual:e}"),
            Violation::SideConstraints { residual } => write!(f, "A x exceeds b by {residual:e}"),
        }
    }
}

/// Every violated condition of membership in `P(n, s)` (and of `A x ≤ b`
/// when given); empty when the point is a member.
pub fn check_membership(p: &BqpPoint, s: usize, constraints: Option<&Constraints>) -> Vec<Violation> {
    let n = p.x.len();
    let x = &p.x;
    let xx = p.xx.as_matrix();
    let mut out = Vec::new();

    let centered = SymMatrix::symmetrize(Matrix::from_fn(n, n, |i, j| xx[(i, j)] - x[i] * x[j]));
    match eig_sym(&centered) {
        Ok(eig) => {
            let lmin = *eig.values.last().unwrap();
            if lmin < -tol::PSD_REPAIR {
                out.push(Violation::NotPsd { lambda_min: lmin });
            }
        }
        Err(_) => out.push(Violation::NotPsd { lambda_min: f64::NAN }),
    }

    let diag = (0..n).map(|i| (xx[(i, i)] - x[i]).abs()).fold(0.0, f64::max);
    if diag > tol::FEASIBILITY {
        out.push(Violation::Diagonal { residual: diag });
    }
    let card = (x.iter().sum::<f64>() - s as f64).abs();
    if card > tol::FEASIBILITY {
        out.push(Violation::Cardinality { residual: card });
    }
    let rows = (0..n).map(|i| (xx.row(i).iter().sum::<f64>() - s as f64 * x[i]).abs()).fold(0.0, f64::max);
    if rows > tol::PSD_REPAIR {
        out.push(Violation::RowSums { residual: rows });
    }
    if let Some(c) = constraints {
        let worst = c.residuals(x).into_iter().fold(f64::NEG_INFINITY, f64::max);
        if worst > tol::FEASIBILITY {
            out.push(Violation::SideConstraints { residual: worst });
        }
    }
    out
}

/// `F = (D C D) ∘ X + Diag(e - x)`.
pub fn matrix(p: &BqpPoint, scaling: &ScalingVector, c: &SymMatrix) -> SymMatrix {
    let g = scaling.gamma();
    let n = p.x.len();
    let cm = c.as_matrix();
    let xx = p.xx.as_matrix();
    let mut f = Matrix::from_fn(n, n, |i, j| g[i] * cm[(i, j)] * g[j] * xx[(i, j)]);
    for i in 0..n {
        f[(i, i)] += 1.0 - p.x[i];
    }
    SymMatrix::symmetrize(f)
}

fn factor(p: &BqpPoint, scaling: &ScalingVector, c: &SymMatrix) -> Option<(Cholesky, Vec<f64>)> {
    let chol = Cholesky::factor(&matrix(p, scaling, c))?;
    Some((chol, p.x.iter().map(|v| 1.0 - v).collect()))
}

/// The objective, or `-∞` when `F` is not positive definite.
pub fn value(p: &BqpPoint, scaling: &ScalingVector, c: &SymMatrix) -> f64 {
    match Cholesky::factor(&matrix(p, scaling, c)) {
        Some(ch) => ch.ldet() - 2.0 * dot(&p.x, scaling.log()),
        None => f64::NEG_INFINITY,
    }
}

/// `∂f/∂(log γᵢ) = 2[(A F⁻¹)ᵢᵢ - xᵢ] = 2uᵢ(1 - (F⁻¹)ᵢᵢ)`, `A = (D C D) ∘ X`.
pub fn grad_log_scaling(p: &BqpPoint, scaling: &ScalingVector, c: &SymMatrix) -> Option<Vec<f64>> {
    let (chol, u) = factor(p, scaling, c)?;
    let d = inverse_diagonal(&chol);
    Some(u.iter().zip(&d).map(|(u, d)| 2.0 * u * (1.0 - d)).collect())
}

/// `4[Diag(u ∘ diag F⁻¹) - Diag(u)(F⁻¹ ∘ F⁻¹)Diag(u)] = 4·G∘(I - G)`.
pub fn hessian_log_scaling(p: &BqpPoint, scaling: &ScalingVector, c: &SymMatrix) -> Option<SymMatrix> {
    let (chol, u) = factor(p, scaling, c)?;
    Some(hadamard_curvature(&chol.inverse(), &u, 4.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c2() -> SymMatrix {
        SymMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap()
    }

    fn half_point() -> BqpPoint {
        BqpPoint::new(vec![0.5, 0.5], SymMatrix::diag(&[0.5, 0.5])).unwrap()
    }

    #[test]
    fn membership_examples() {
        let lift = BqpPoint::lift_set(3, &[0, 2]);
        assert!(check_membership(&lift, 2, None).is_empty());
        let mix = BqpPoint::combination(&[lift, BqpPoint::lift_set(3, &[1, 2])], &[0.3, 0.7]);
        assert!(check_membership(&mix, 2, None).is_empty());
        assert!(check_membership(&half_point(), 1, None).is_empty());
        let bad = BqpPoint::lift(&[0.5, 0.5]);
        let v = check_membership(&bad, 1, None);
        assert!(v.iter().any(|v| matches!(v, Violation::Diagonal { .. })), "{v:?}");
    }

    #[test]
    fn values() {
        let e = ScalingVector::ones(2);
        let lift = BqpPoint::lift(&[1.0, 0.0]);
        assert!((value(&lift, &e, &c2()) - 2f64.ln()).abs() < 1e-12);
        let y = ScalingVector::from_gamma(vec![2.0, 1.0]).unwrap();
        assert!((value(&lift, &y, &c2()) - 2f64.ln()).abs() < 1e-12);
        assert!((value(&half_point(), &e, &c2()) - 2.0 * 1.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn derivatives_at_special_points() {
        let e = ScalingVector::ones(2);
        let lift = BqpPoint::lift(&[1.0, 0.0]);
        assert!(grad_log_scaling(&lift, &e, &c2()).unwrap().iter().all(|v| v.abs() < 1e-12));
        assert!(hessian_log_scaling(&lift, &e, &c2()).unwrap().as_matrix().max_abs() < 1e-12);
        let zero = BqpPoint::lift(&[0.0, 0.0]);
        assert!(grad_log_scaling(&zero, &e, &c2()).unwrap().iter().all(|v| v.abs() < 1e-12));
        let h = hessian_log_scaling(&half_point(), &e, &c2()).unwrap();
        let m = h.as_matrix();
        assert!((m[(0, 0)] - 8.0 / 9.0).abs() < 1e-12 && (m[(1, 1)] - 8.0 / 9.0).abs() < 1e-12);
        assert!(m[(0, 1)].abs() < 1e-12);
    }
}
