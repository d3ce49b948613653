//! The scaled linx relaxation
//!
//! ```text
//! f(x; Υ) = ½ ldet( D C Diag(x) C D + Diag(e - x) ) - Σ xᵢ log γᵢ,   D = Diag(Υ)
//! ```
//!
//! which is concave in `x`, agrees with `ldet C[S,S]` at every 0/1 point
//! and whose maximum over the relaxation polytope is convex in `log Υ`.

use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;

use crate::error::Result;
use crate::frank_wolfe::{self, ConcaveObjective};
use crate::instance::{Instance, ScalingVector};
use crate::linalg::{eigenvalues_sym, Cholesky, Matrix, SymMatrix};
use crate::math::dot;
use crate::polytope::Polytope;
use crate::relax::{BoundReport, Method, SolveOptions};

/// The linx objective for a fixed covariance and scaling.
///
/// The factorization of `F(x)` at the last point is cached, so the value,
/// gradient and line search at one iterate share it.
#[derive(Debug, Clone)]
pub struct Linx {
    /// `D·C`; row `i` is `γᵢ·C[i,:]`.
    b: Matrix,
    log_gamma: Vec<f64>,
    cache: RefCell<Option<Factored>>,
}

/// `F(x) = L Lᵀ`, with `L⁻¹` and `L⁻¹·D·C` once a derivative asked for them.
#[derive(Debug, Clone)]
struct Factored {
    x: Vec<f64>,
    chol: Cholesky,
    solved: Option<(Matrix, Matrix)>,
}

impl Linx {
    pub fn new(c: &SymMatrix, scaling: &ScalingVector) -> Self {
        let n = c.order();
        assert_eq!(scaling.len(), n, "scaling length differs from covariance order");
        let g = scaling.gamma();
        let cm = c.as_matrix();
        let b = Matrix::from_fn(n, n, |i, j| g[i] * cm[(i, j)]);
        Linx { b, log_gamma: scaling.log().to_vec(), cache: RefCell::new(None) }
    }

    pub fn n(&self) -> usize {
        self.b.rows()
    }

    /// `F(x) = D C Diag(x) C D + Diag(e - x)`.
    pub fn matrix(&self, x: &[f64]) -> SymMatrix {
        let mut f = self.b.weighted_gram(x);
        let m = f.as_mut_matrix();
        for (i, xi) in x.iter().enumerate() {
            m[(i, i)] += 1.0 - xi;
        }
        f
    }

    /// Runs `f` on the factorization at `x`, or returns `None` when `F(x)`
    /// is not positive definite. With `solved`, `L⁻¹` and `L⁻¹·D·C` are
    /// passed as well.
    fn with_factor<R>(&self, x: &[f64], solved: bool, f: impl FnOnce(&Cholesky, Option<&(Matrix, Matrix)>) -> R) -> Option<R> {
        let mut cache = self.cache.borrow_mut();
        if !matches!(&*cache, Some(c) if c.x == x) {
            let chol = Cholesky::factor(&self.matrix(x))?;
            *cache = Some(Factored { x: x.to_vec(), chol, solved: None });
        }
        let c = cache.as_mut().expect("filled above");
        if solved && c.solved.is_none() {
            let mut linv = Matrix::identity(x.len());
            c.chol.forward_in_place(&mut linv);
            let mut z = self.b.clone();
            c.chol.forward_in_place(&mut z);
            c.solved = Some((linv, z));
        }
        Some(f(&c.chol, c.solved.as_ref()))
    }

    /// `f(x; Υ)`, or `-∞` when `F(x)` is not positive definite.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.with_factor(x, false, |ch, _| 0.5 * ch.ldet() - dot(x, &self.log_gamma))
            .unwrap_or(f64::NEG_INFINITY)
    }

    /// `∂f/∂xᵢ = ½[(C D F⁻¹ D C)ᵢᵢ - (F⁻¹)ᵢᵢ] - log γᵢ`.
    pub fn grad_x(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.with_factor(x, true, |_, solved| {
            let (linv, z) = solved.expect("requested");
            // Squared column norms of L⁻¹ and L⁻¹·D·C.
            let inv_diag = column_norms2(linv);
            let quad = column_norms2(z);
            (0..x.len()).map(|i| 0.5 * (quad[i] - inv_diag[i]) - self.log_gamma[i]).collect()
        })
    }

    /// `∂f/∂(log γᵢ) = (A F⁻¹)ᵢᵢ - xᵢ = uᵢ(1 - (F⁻¹)ᵢᵢ)` with `u = e - x`.
    pub fn grad_log_scaling(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.with_factor(x, true, |_, solved| {
            let inv_diag = column_norms2(&solved.expect("requested").0);
            x.iter().zip(&inv_diag).map(|(xi, d)| (1.0 - xi) * (1.0 - d)).collect()
        })
    }

    /// Hessian in `log Υ` at fixed `x`:
    /// `2[Diag(u ∘ diag F⁻¹) - Diag(u)(F⁻¹ ∘ F⁻¹)Diag(u)]`, which equals
    /// `2·G∘(I - G)` with `G = Diag(u)^½ F⁻¹ Diag(u)^½` and stays defined
    /// when some `xᵢ = 1`.
    pub fn hessian_log_scaling(&self, x: &[f64]) -> Option<SymMatrix> {
        let u: Vec<f64> = x.iter().map(|v| 1.0 - v).collect();
        self.with_factor(x, false, |ch, _| hadamard_curvature(&ch.inverse(), &u, 2.0))
    }
}

fn column_norms2(m: &Matrix) -> Vec<f64> {
    let mut d = vec![0.0; m.cols()];
    for k in 0..m.rows() {
        for (di, v) in d.iter_mut().zip(m.row(k)) {
            *di += v * v;
        }
    }
    d
}

/// `scale·[Diag(u ∘ diag P) - Diag(u)(P ∘ P)Diag(u)]` for symmetric `P`.
pub(crate) fn hadamard_curvature(p: &Matrix, u: &[f64], scale: f64) -> SymMatrix {
    let n = u.len();
    let mut h = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let pij = p[(i, j)];
            h[(i, j)] = -scale * u[i] * u[j] * pij * pij;
        }
        h[(i, i)] += scale * u[i] * p[(i, i)];
    }
    SymMatrix::symmetrize(h)
}

/// `diag(F⁻¹)` from `F = L Lᵀ` as column norms of `L⁻¹`.
pub(crate) fn inverse_diagonal(chol: &Cholesky) -> Vec<f64> {
    let n = chol.factor_l().rows();
    let mut linv = Matrix::identity(n);
    chol.forward_in_place(&mut linv);
    column_norms2(&linv)
}

impl ConcaveObjective for Linx {
    fn value(&self, x: &[f64]) -> f64 {
        Linx::value(self, x)
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.grad_x(x)
    }

    /// Exact line search on `φ(t) = f(x + t·d)`. With `G = D C Diag(d) C D -
    /// Diag(d)` and `μ` the eigenvalues of `L⁻¹ G L⁻ᵀ` (`F(x) = L Lᵀ`),
    /// `φ'(t) = ∇f(x)ᵀd - ½ Σ tμₖ²/(1 + tμₖ)`, so after one
    /// eigenvalue computation every Newton step is `O(n)`. Anchoring at the
    /// gradient avoids the cancellation in `½ Σ μₖ - dᵀ log Υ`.
    fn line_search(&self, x: &[f64], d: &[f64], t_max: f64) -> Option<f64> {
        let slope = dot(&self.grad_x(x)?, d);
        // L⁻¹ G L⁻ᵀ = Z Diag(d) Zᵀ - L⁻¹ Diag(d) L⁻ᵀ with Z = L⁻¹·D·C.
        let w = self.with_factor(x, true, |_, solved| {
            let (linv, z) = solved.expect("requested");
            z.weighted_gram(d).into_matrix().sub(linv.weighted_gram(d).as_matrix())
        })?;
        let mu = eigenvalues_sym(&SymMatrix::symmetrize(w)).ok()?;
        newton_on_spectrum(&mu, slope, t_max)
    }
}

/// Maximizer on `[0, t_max]` of the concave `φ` with
/// `φ'(t) = slope - ½ Σ tμₖ²/(1 + tμₖ)`.
fn newton_on_spectrum(mu: &[f64], slope: f64, t_max: f64) -> Option<f64> {
    let derivs = |t: f64| {
        let mut d1 = slope;
        let mut d2 = 0.0;
        for &m in mu {
            let q = m / (1.0 + t * m);
            d1 -= 0.5 * t * m * q;
            d2 -= 0.5 * q * q;
        }
        (d1, d2)
    };
    if !(slope > 0.0) {
        return Some(0.0);
    }
    // The domain ends where 1 + tμ reaches 0 for the most negative μ.
    let mu_min = mu.iter().copied().fold(0.0, f64::min);
    let mut hi = if mu_min < 0.0 { t_max.min(-(1.0 - 1e-12) / mu_min) } else { t_max };
    if derivs(hi).0 >= 0.0 {
        return Some(hi);
    }
    let mut lo = 0.0;
    let mut t = 0.0;
    for _ in 0..100 {
        let (d1, d2) = derivs(t);
        if d1 > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if d1.abs() <= 1e-15 * slope || hi - lo <= 1e-16 * t_max {
            break;
        }
        let newton = t - d1 / d2;
        t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Some(t)
}

/// Certified linx bound for `inst` under `scaling`.
pub fn solve(inst: &Instance, scaling: &ScalingVector, opts: &SolveOptions) -> Result<BoundReport> {
    let poly = Polytope::for_instance(inst, opts.pins.as_deref())?;
    solve_on(inst, &poly, scaling, opts)
}

pub(crate) fn solve_on(
    inst: &Instance,
    poly: &Polytope,
    scaling: &ScalingVector,
    opts: &SolveOptions,
) -> Result<BoundReport> {
    let f = Linx::new(inst.covariance(), scaling);
    let r = frank_wolfe::maximize(poly, &f, opts.warm_start.as_deref(), opts.fw_options())?;
    Ok(BoundReport::from_solve(Method::Linx, r, scaling.clone(), 0.0, false))
}

/// Convenience form of [`Linx::value`].
pub fn value(x: &[f64], scaling: &ScalingVector, c: &SymMatrix) -> f64 {
    Linx::new(c, scaling).value(x)
}
