//! The scaled factorization bound (DDFact).
//!
//! With `C = F Fᵀ` (`F` is `n × k`), the relaxation maximizes
//!
//! ```text
//! f(x; Υ) = Γ_s( Fᵀ Diag(Υ ∘ x) F ) - Σ xᵢ log γᵢ
//! ```
//!
//! where `Γ_s` applied to a spectrum `λ₁ ≥ … ≥ λ_k` keeps the `ι` largest
//! eigenvalues and replaces the rest by their mean:
//! `Σ_{ℓ≤ι} log λ_ℓ + (s-ι)·log( Σ_{ℓ>ι} λ_ℓ / (s-ι) )`, with `ι` the unique
//! index such that `λ_ι > Σ_{ℓ>ι} λ_ℓ/(s-ι) ≥ λ_{ι+1}`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::frank_wolfe::{self, ConcaveObjective};
use crate::instance::{Instance, ScalingVector};
use crate::linalg::{eig_sym, EigDecomp, Matrix, SymMatrix};
use crate::math::{dot, ln, sqrt};
use crate::polytope::{Pin, Polytope};
use crate::relax::{BoundReport, Method, SolveOptions};
use crate::tol;

/// `C = F·Fᵀ` restricted to the numerically nonzero spectrum.
#[derive(Debug, Clone)]
pub struct Factorization {
    f: Matrix,
    ft: Matrix,
}

impl Factorization {
    /// `F = Q_r Diag(√λ_r)` over eigenvalues above the rank threshold.
    pub fn from_spectrum(eig: &EigDecomp) -> Self {
        let lmax = eig.values[0];
        let k = eig.values.iter().take_while(|&&l| l > tol::RANK_RELATIVE * lmax).count();
        let n = eig.vectors.rows();
        let f = Matrix::from_fn(n, k, |i, j| eig.vectors[(i, j)] * sqrt(eig.values[j]));
        let ft = f.transpose();
        Factorization { f, ft }
    }

    pub fn factor(&self) -> &Matrix {
        &self.f
    }

    pub fn width(&self) -> usize {
        self.f.cols()
    }
}

pub fn factorize(c: &SymMatrix) -> Result<Factorization> {
    Ok(Factorization::from_spectrum(&eig_sym(c)?))
}

/// `Γ_s` evaluated on the spectrum of a `k × k` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaEval {
    pub iota: usize,
    pub value: f64,
    /// Gradient spectrum: `1/λ_ℓ` for `ℓ ≤ ι`, then `(s-ι)/Σ_{ℓ>ι} λ_ℓ`.
    pub beta: Vec<f64>,
    pub lambda: Vec<f64>,
    pub q: Matrix,
}

/// The index `ι ∈ [0, s)` splitting a descending nonnegative spectrum, or
/// `None` when the tail mass at that index is zero.
///
/// The first `ι` with `mean_ι ≥ λ_{ι+1}` also satisfies `λ_ι > mean_ι`:
/// failing at `ι - 1` means `(λ_ι + tail_ι)/(s-ι+1) < λ_ι`.
pub fn compute_iota(lambda: &[f64], s: usize) -> Option<usize> {
    assert!(s >= 1 && s <= lambda.len(), "need 1 <= s <= k");
    for iota in 0..s {
        // Summed directly: a running difference can round a tie the wrong way.
        let tail: f64 = lambda[iota..].iter().sum();
        let mean = tail / (s - iota) as f64;
        if !(tail > 0.0) {
            return None;
        }
        if mean >= lambda[iota] {
            return Some(iota);
        }
    }
    // Unreachable for nonnegative spectra: at ι = s-1 the mean is the tail.
    Some(s - 1)
}

/// `(ι, φ_s(λ), β)` for a descending spectrum; `None` outside the domain.
pub fn gamma_spectrum(lambda: &[f64], s: usize) -> Option<(usize, f64, Vec<f64>)> {
    if lambda.len() < s || !(lambda[s - 1] > tol::DDFACT_DOMAIN * lambda[0]) {
        return None;
    }
    let iota = compute_iota(lambda, s)?;
    let tail: f64 = lambda[iota..].iter().sum();
    let rest = (s - iota) as f64;
    let value = lambda[..iota].iter().map(|&l| ln(l)).sum::<f64>() + rest * ln(tail / rest);
    let beta = (0..lambda.len()).map(|l| if l < iota { 1.0 / lambda[l] } else { rest / tail }).collect();
    Some((iota, value, beta))
}

/// `Γ_s(M)` with its spectral data.
pub fn gamma_s(m: &SymMatrix, s: usize) -> Option<GammaEval> {
    let eig = eig_sym(m).ok()?;
    let lambda: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0)).collect();
    let (iota, value, beta) = gamma_spectrum(&lambda, s)?;
    Some(GammaEval { iota, value, beta, lambda, q: eig.vectors })
}

/// The DDFact objective for a fixed factorization, cardinality and scaling.
#[derive(Debug, Clone)]
pub struct Ddfact {
    fact: Factorization,
    s: usize,
    gamma: Vec<f64>,
    log_gamma: Vec<f64>,
}

impl Ddfact {
    pub fn new(fact: Factorization, s: usize, scaling: &ScalingVector) -> Self {
        assert_eq!(fact.f.rows(), scaling.len(), "scaling length differs from n");
        Ddfact { fact, s, gamma: scaling.gamma().to_vec(), log_gamma: scaling.log().to_vec() }
    }

    pub fn for_instance(inst: &Instance, scaling: &ScalingVector) -> Self {
        Ddfact::new(Factorization::from_spectrum(inst.spectrum()), inst.s(), scaling)
    }

    /// `M = Fᵀ Diag(Υ ∘ x) F`.
    pub fn matrix(&self, x: &[f64]) -> SymMatrix {
        let w: Vec<f64> = x.iter().zip(&self.gamma).map(|(a, b)| a * b).collect();
        self.fact.ft.weighted_gram(&w)
    }

    pub fn eval(&self, x: &[f64]) -> Option<GammaEval> {
        gamma_s(&self.matrix(x), self.s)
    }

    /// `f(x; Υ)`, or `-∞` when `λ_s(M)` vanishes.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self.eval(x) {
            Some(ge) => ge.value - dot(x, &self.log_gamma),
            None => f64::NEG_INFINITY,
        }
    }

    /// `Fᵢ (Q Diag(β) Qᵀ) Fᵢᵀ` for every row `i`.
    fn row_quadratics(&self, ge: &GammaEval) -> Vec<f64> {
        let p = self.fact.f.matmul(&ge.q);
        (0..p.rows()).map(|i| p.row(i).iter().zip(&ge.beta).map(|(v, b)| b * v * v).sum()).collect()
    }

    /// `Tᵢ = γᵢ Fᵢ (Q Diag(β) Qᵀ) Fᵢᵀ - log γᵢ`.
    pub fn grad_x(&self, x: &[f64]) -> Option<Vec<f64>> {
        let ge = self.eval(x)?;
        let quad = self.row_quadratics(&ge);
        Some((0..quad.len()).map(|i| self.gamma[i] * quad[i] - self.log_gamma[i]).collect())
    }

    /// `∂f/∂(log γᵢ) = xᵢ(γᵢ Fᵢ (Q Diag(β) Qᵀ) Fᵢᵀ - 1)`.
    pub fn grad_log_scaling(&self, x: &[f64]) -> Option<Vec<f64>> {
        if x.iter().all(|&v| v == 0.0) {
            // Every component carries a factor xᵢ.
            return Some(vec![0.0; x.len()]);
        }
        let ge = self.eval(x)?;
        let quad = self.row_quadratics(&ge);
        Some((0..quad.len()).map(|i| x[i] * (self.gamma[i] * quad[i] - 1.0)).collect())
    }
}

impl ConcaveObjective for Ddfact {
    fn value(&self, x: &[f64]) -> f64 {
        Ddfact::value(self, x)
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.grad_x(x)
    }

    /// The slope `∇f(x + t·d)ᵀd` is nonincreasing in `t`; its root costs
    /// far fewer eigendecompositions than a search on values.
    fn line_search(&self, x: &[f64], d: &[f64], t_max: f64) -> Option<f64> {
        let slope = |t: f64| {
            let p: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + t * b).collect();
            self.grad_x(&p).map(|g| dot(&g, d))
        };
        let s0 = slope(0.0)?;
        Some(frank_wolfe::slope_root(slope, s0, t_max))
    }
}

/// Certified DDFact bound for `inst` under `scaling`.
pub fn solve(inst: &Instance, scaling: &ScalingVector, opts: &SolveOptions) -> Result<BoundReport> {
    let poly = Polytope::for_instance(inst, opts.pins.as_deref())?;
    let f = Ddfact::for_instance(inst, scaling);
    let r = frank_wolfe::maximize(&poly, &f, opts.warm_start.as_deref(), opts.fw_options())?;
    Ok(BoundReport::from_solve(Method::Ddfact, r, scaling.clone(), 0.0, false))
}

/// DDFact on the complementary instance `(C⁻¹, n - s, -A, b - A·e)`, reported
/// as a bound on the original problem. `scaling` scales the complementary
/// covariance.
pub fn solve_complement(inst: &Instance, scaling: &ScalingVector, opts: &SolveOptions) -> Result<BoundReport> {
    let (comp, offset) = inst.complement()?;
    let r = solve(&comp, scaling, &complement_options(opts, offset))?;
    Ok(complement_report(r, offset))
}

/// Solve options for the complementary instance: pins and warm start are
/// flipped to `y = e - x` and the stop level is shifted by the offset.
pub(crate) fn complement_options(opts: &SolveOptions, offset: f64) -> SolveOptions {
    SolveOptions {
        tol: opts.tol,
        max_iter: opts.max_iter,
        warm_start: opts.warm_start.as_ref().map(|x| x.iter().map(|v| 1.0 - v).collect()),
        pins: opts.pins.as_ref().map(|p| p.iter().map(|q| q.flipped()).collect::<Vec<Pin>>()),
        stop_above: opts.stop_above.map(|v| v - offset),
    }
}

/// Maps a DDFact report on the complementary instance to the original.
pub(crate) fn complement_report(r: BoundReport, offset: f64) -> BoundReport {
    BoundReport {
        method: Method::DdfactComp,
        upper_bound: r.upper_bound + offset,
        value: r.value + offset,
        x: r.x.iter().map(|y| 1.0 - y).collect(),
        gradient: r.gradient.iter().map(|g| -g).collect(),
        ..r
    }
}

/// Convenience form of [`Ddfact::value`].
pub fn value(x: &[f64], scaling: &ScalingVector, fact: &Factorization, s: usize) -> f64 {
    Ddfact::new(fact.clone(), s, scaling).value(x)
}

/// Whether every `ι` in `[0, s)` other than `iota` violates the defining
/// inequalities; used to check uniqueness.
pub fn iota_conditions_hold(lambda: &[f64], s: usize, iota: usize) -> bool {
    let tail: f64 = lambda[iota..].iter().sum();
    let mean = tail / (s - iota) as f64;
    let upper = if iota == 0 { f64::INFINITY } else { lambda[iota - 1] };
    upper > mean && mean >= lambda[iota]
}

#[cfg(test)]
mod tests {
    use super::*;

    use crate::error::Error;

    fn c2() -> SymMatrix {
        SymMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap()
    }

    #[test]
    fn iota_examples() {
        assert_eq!(compute_iota(&[4.0, 2.0, 1.0], 2), Some(1));
        assert_eq!(compute_iota(&[1.0, 1.0, 1.0, 1.0], 2), Some(0));
        assert_eq!(compute_iota(&[2.0, 0.0], 1), Some(0));
    }

    #[test]
    fn gamma_examples() {
        let (_, v, b) = gamma_spectrum(&[4.0, 2.0, 1.0], 2).unwrap();
        assert!((v - 12f64.ln()).abs() < 1e-12);
        assert_eq!(b, vec![0.25, 1.0 / 3.0, 1.0 / 3.0]);
        let (_, v, b) = gamma_spectrum(&[1.0; 4], 2).unwrap();
        assert!((v - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert_eq!(b, vec![0.5; 4]);
        let (_, v, b) = gamma_spectrum(&[2.0, 0.0], 1).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-12);
        assert_eq!(b, vec![0.5, 0.5]);
        assert!(gamma_spectrum(&[1.0, 0.0], 2).is_none());
    }

    #[test]
    fn factorization_reproduces_covariance() {
        let f = factorize(&c2()).unwrap();
        let back = f.factor().matmul(&f.factor().transpose());
        assert!(back.sub(c2().as_matrix()).max_abs() < 1e-10);
        let f = factorize(&SymMatrix::diag(&[4.0, 0.0])).unwrap();
        assert_eq!(f.width(), 1);
        assert!((f.factor()[(0, 0)].abs() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn values_on_two_by_two() {
        let fact = factorize(&c2()).unwrap();
        let e = ScalingVector::ones(2);
        assert!((value(&[1.0, 0.0], &e, &fact, 1) - 2f64.ln()).abs() < 1e-12);
        assert!((value(&[0.5, 0.5], &e, &fact, 1) - 2f64.ln()).abs() < 1e-12);
        let y = ScalingVector::uniform(2, 5.0).unwrap();
        assert!((value(&[0.3, 0.7], &y, &fact, 1) - value(&[0.3, 0.7], &e, &fact, 1)).abs() < 1e-12);
    }

    #[test]
    fn gradient_examples() {
        let f = Ddfact::new(factorize(&SymMatrix::identity(2)).unwrap(), 1, &ScalingVector::ones(2));
        let t = f.grad_x(&[0.5, 0.5]).unwrap();
        assert!(t.iter().all(|v| (v - 1.0).abs() < 1e-12), "{t:?}");
        let f = Ddfact::new(factorize(&c2()).unwrap(), 1, &ScalingVector::ones(2));
        let t = f.grad_x(&[1.0, 0.0]).unwrap();
        assert!((t[0] - 1.0).abs() < 1e-12, "{t:?}");
        assert_eq!(f.grad_log_scaling(&[0.0, 0.0]), Some(vec![0.0, 0.0]));
    }

    #[test]
    fn solves_two_by_two_tightly() {
        let inst = Instance::new(c2(), 1, None).unwrap();
        let r = solve(&inst, &ScalingVector::ones(2), &SolveOptions::default()).unwrap();
        assert!((r.upper_bound - 2f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn complement_bound_is_valid() {
        let inst = Instance::new(SymMatrix::diag(&[2.0, 3.0, 4.0]), 2, None).unwrap();
        let r = solve_complement(&inst, &ScalingVector::ones(3), &SolveOptions::default()).unwrap();
        assert!(r.upper_bound >= 12f64.ln() - 1e-6);
        let near = Instance::new(SymMatrix::diag(&[1.0, 1.0, 1e-10]), 1, None).unwrap();
        assert_eq!(
            solve_complement(&near, &ScalingVector::ones(3), &SolveOptions::default()).unwrap_err(),
            Error::ComplementUnavailable
        );
    }
}
