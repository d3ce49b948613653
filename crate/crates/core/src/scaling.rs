//! Tightening bounds by choosing the scaling.
//!
//! A full vector Υ is tuned by BFGS on `log Υ` (g-scaling) using the
//! envelope gradient: the `log Υ` partial derivative of the relaxation
//! objective at the relaxation optimum. A uniform scaling `γ·e` is tuned by a
//! safeguarded Newton iteration on `log γ` (o-scaling).

use alloc::vec;
use alloc::vec::Vec;

use crate::bqp::{self, BqpPoint};
use crate::ddfact::{self, Ddfact};
use crate::error::{Error, Result};
use crate::instance::{Instance, ScalingVector};
use crate::linalg::SymMatrix;
use crate::linx::{self, Linx};
use crate::math::{dot, exp, norm_inf};
use crate::relax::{BoundReport, Method, SolveOptions};
use crate::tol;

/// Largest change of any `log γᵢ` in one BFGS step.
const MAX_LOG_STEP: f64 = 2.0;
const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingStatus {
    /// Gradient below tolerance.
    Converged,
    /// Step budget used up.
    BudgetExhausted,
    /// Backtracking found no decrease; the gradient is at noise level.
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub value: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct ScalingResult {
    pub scaling: ScalingVector,
    pub trace: Vec<TraceEntry>,
    pub best_value: f64,
    pub start_value: f64,
    pub status: ScalingStatus,
    /// Bound report at the best scaling.
    pub report: BoundReport,
    /// Envelope gradient at the best scaling.
    pub gradient: Vec<f64>,
    pub solves: usize,
}

#[derive(Debug, Clone)]
pub struct ScalingOptions {
    pub max_steps: usize,
    /// Relaxation solve options, applied to every solve.
    pub inner: SolveOptions,
    /// Stop when `‖∇‖∞` falls below this.
    pub grad_tol: f64,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions { max_steps: 50, inner: SolveOptions::with_tol(tol::FW_GAP_SCALING), grad_tol: 1e-7 }
    }
}

impl ScalingOptions {
    pub fn with_steps(max_steps: usize) -> Self {
        ScalingOptions { max_steps, ..Default::default() }
    }
}

/// A bound as a function of the scaling, with its envelope gradient.
pub struct BoundFunction<'a> {
    method: Method,
    inst: &'a Instance,
    /// For the complementary bound: the complement and `ldet C`.
    comp: Option<(Instance, f64)>,
}

impl<'a> BoundFunction<'a> {
    pub fn new(method: Method, inst: &'a Instance) -> Result<Self> {
        let comp = match method {
            Method::DdfactComp => Some(inst.complement()?),
            _ => None,
        };
        Ok(BoundFunction { method, inst, comp })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// The instance in original coordinates.
    pub fn instance(&self) -> &Instance {
        self.inst
    }

    /// The instance whose covariance the scaling multiplies.
    pub fn scaled_instance(&self) -> &Instance {
        self.comp.as_ref().map_or(self.inst, |(c, _)| c)
    }

    /// Whether the bound is invariant under `Υ ↦ c·Υ`.
    pub fn scale_invariant(&self) -> bool {
        self.method != Method::Linx
    }

    /// Solves the relaxation without the scaling gradient.
    pub fn solve(&self, scaling: &ScalingVector, opts: &SolveOptions) -> Result<BoundReport> {
        match &self.comp {
            Some((comp, offset)) => {
                let r = ddfact::solve(comp, scaling, &ddfact::complement_options(opts, *offset))?;
                Ok(ddfact::complement_report(r, *offset))
            }
            None => crate::relax::solve(self.method, self.inst, scaling, opts),
        }
    }

    /// Solves the relaxation and returns the report (original coordinates)
    /// and the envelope gradient in `log Υ`.
    pub fn evaluate(&self, scaling: &ScalingVector, opts: &SolveOptions) -> Result<(BoundReport, Vec<f64>)> {
        let out = self.evaluate_inner(scaling, opts);
        if let Ok((r, _)) = &out {
            log::debug!(
                "{} solve: bound {} gap {:e} after {} iterations{}",
                self.method,
                r.upper_bound,
                r.gap,
                r.iterations,
                if r.converged { "" } else { " (not converged)" }
            );
        }
        out
    }

    fn evaluate_inner(&self, scaling: &ScalingVector, opts: &SolveOptions) -> Result<(BoundReport, Vec<f64>)> {
        match (self.method, &self.comp) {
            (Method::Linx, _) => {
                let r = linx::solve(self.inst, scaling, opts)?;
                let g = Linx::new(self.inst.covariance(), scaling)
                    .grad_log_scaling(&r.x)
                    .ok_or_else(|| Error::Numerical("linx solution left the domain".into()))?;
                Ok((r, g))
            }
            (Method::Ddfact, _) => {
                let r = ddfact::solve(self.inst, scaling, opts)?;
                let g = ddfact_gradient(self.inst, scaling, &r.x)?;
                Ok((r, g))
            }
            (Method::DdfactComp, Some((comp, offset))) => {
                let r = ddfact::solve(comp, scaling, &ddfact::complement_options(opts, *offset))?;
                let g = ddfact_gradient(comp, scaling, &r.x)?;
                Ok((ddfact::complement_report(r, *offset), g))
            }
            (Method::DdfactComp, None) => unreachable!("complement computed in new"),
        }
    }

    /// `eᵀ H e` for the `log Υ` Hessian at fixed `x` when available
    /// in closed form (linx only).
    fn uniform_curvature(&self, scaling: &ScalingVector, x: &[f64]) -> Option<f64> {
        match self.method {
            Method::Linx => {
                let h = Linx::new(self.inst.covariance(), scaling).hessian_log_scaling(x)?;
                Some(h.as_matrix().as_slice().iter().sum())
            }
            _ => None,
        }
    }
}

fn ddfact_gradient(inst: &Instance, scaling: &ScalingVector, x: &[f64]) -> Result<Vec<f64>> {
    Ddfact::for_instance(inst, scaling)
        .grad_log_scaling(x)
        .ok_or_else(|| Error::Numerical("DDFact solution left the domain".into()))
}

fn center(t: &mut [f64]) {
    let mean = t.iter().sum::<f64>() / t.len() as f64;
    for v in t.iter_mut() {
        *v -= mean;
    }
}

/// BFGS on `log Υ` minimizing the certified bound, from `start`.
///
/// Trial points where the relaxation cannot be solved are rejected by the
/// line search; failure at the start is an error. The returned scaling is
/// the best visited one. Scale-invariant bounds are kept at geometric mean 1.
pub fn optimize_g_scaling(
    method: Method,
    inst: &Instance,
    start: &ScalingVector,
    opts: &ScalingOptions,
) -> Result<ScalingResult> {
    let bound = BoundFunction::new(method, inst)?;
    optimize_g_scaling_with(&bound, start, opts)
}

pub fn optimize_g_scaling_with(
    bound: &BoundFunction<'_>,
    start: &ScalingVector,
    opts: &ScalingOptions,
) -> Result<ScalingResult> {
    let n = start.len();
    let normalize = bound.scale_invariant();
    let mut t = start.log().to_vec();
    if normalize {
        center(&mut t);
    }
    let (mut rep, mut g) = bound.evaluate(&ScalingVector::from_log(t.clone())?, &opts.inner)?;
    let mut solves = 1;
    let mut phi = rep.upper_bound;
    let start_value = phi;
    let mut trace = vec![TraceEntry { iteration: 0, value: phi, grad_norm: norm_inf(&g) }];
    let mut h_inv: Option<Vec<f64>> = None;
    let mut status = ScalingStatus::BudgetExhausted;

    for step in 1..=opts.max_steps {
        if norm_inf(&g) <= opts.grad_tol {
            status = ScalingStatus::Converged;
            break;
        }
        let mut p = match &h_inv {
            Some(h) => (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &g)).collect(),
            None => g.iter().map(|v| -v).collect::<Vec<f64>>(),
        };
        if !(dot(&p, &g) < 0.0) {
            h_inv = None;
            p = g.iter().map(|v| -v).collect();
        }
        let longest = norm_inf(&p);
        if longest > MAX_LOG_STEP {
            for v in p.iter_mut() {
                *v *= MAX_LOG_STEP / longest;
            }
        }
        let slope = dot(&p, &g);

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            // Values are only known to within the solve gaps; below that the
            // sufficient-decrease test compares noise.
            if alpha * slope.abs() < opts.inner.tol.max(rep.gap) {
                break;
            }
            let mut trial: Vec<f64> = t.iter().zip(&p).map(|(a, b)| a + alpha * b).collect();
            if normalize {
                center(&mut trial);
            }
            if let Ok(sv) = ScalingVector::from_log(trial.clone()) {
                solves += 1;
                if let Ok((r, gn)) = bound.evaluate(&sv, &opts.inner) {
                    if r.upper_bound <= phi + ARMIJO_C1 * alpha * slope {
                        accepted = Some((trial, r, gn));
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        let Some((t_new, r_new, g_new)) = accepted else {
            status = ScalingStatus::Stalled;
            break;
        };

        let s: Vec<f64> = t_new.iter().zip(&t).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * crate::math::sqrt(dot(&s, &s) * dot(&y, &y)) {
            let h = h_inv.get_or_insert_with(|| {
                // Shanno-Phua initial scaling.
                let scale = sy / dot(&y, &y);
                let mut id = vec![0.0; n * n];
                for i in 0..n {
                    id[i * n + i] = scale;
                }
                id
            });
            bfgs_update(h, &s, &y, sy);
        }

        t = t_new;
        g = g_new;
        rep = r_new;
        phi = rep.upper_bound;
        trace.push(TraceEntry { iteration: step, value: phi, grad_norm: norm_inf(&g) });
    }
    if status == ScalingStatus::BudgetExhausted && norm_inf(&g) <= opts.grad_tol {
        status = ScalingStatus::Converged;
    }
    Ok(ScalingResult {
        scaling: ScalingVector::from_log(t)?,
        trace,
        best_value: phi,
        start_value,
        status,
        report: rep,
        gradient: g,
        solves,
    })
}

/// `H ← (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ` with `ρ = 1/(yᵀs)`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    let coef = rho * rho * yhy + rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + coef * s[i] * s[j];
        }
    }
}

/// Outcome of the scalar Newton iteration.
#[derive(Debug, Clone)]
pub struct OScalingResult {
    pub gamma: f64,
    /// Bound (or objective) value at `gamma`.
    pub value: f64,
    /// `φ'(log γ)` at `gamma`.
    pub derivative: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relaxation report at `gamma`, for solved bounds.
    pub report: Option<BoundReport>,
}

/// Newton on `t = log γ` for `φ(t) = bound(eᵗ·e)`, with `φ' = Σᵢ gᵢ` from
/// the envelope gradient and `φ''` approximated by `eᵀHe` at fixed `x`
/// where available. Stops when `|φ'| < 10⁻¹⁰` or after 100 iterations.
pub fn optimize_o_scaling(method: Method, inst: &Instance, gamma0: f64, opts: &ScalingOptions) -> Result<OScalingResult> {
    let bound = BoundFunction::new(method, inst)?;
    optimize_o_scaling_with(&bound, gamma0, opts)
}

pub fn optimize_o_scaling_with(bound: &BoundFunction<'_>, gamma0: f64, opts: &ScalingOptions) -> Result<OScalingResult> {
    if !(gamma0 > 0.0) || !gamma0.is_finite() {
        return Err(Error::InvalidInput("gamma must be positive".into()));
    }
    let n = bound.scaled_instance().n();
    let mut reports: Vec<(f64, BoundReport)> = Vec::new();
    let out = newton_1d(
        |t| {
            let sv = ScalingVector::uniform(n, exp(t))?;
            let (r, g) = bound.evaluate(&sv, &opts.inner)?;
            let d1: f64 = g.iter().sum();
            let x_scaled: Vec<f64> = match bound.method() {
                Method::DdfactComp => r.x.iter().map(|v| 1.0 - v).collect(),
                _ => r.x.clone(),
            };
            let d2 = bound.uniform_curvature(&sv, &x_scaled).unwrap_or(f64::NAN);
            let phi = r.upper_bound;
            reports.push((t, r));
            Ok((phi, d1, d2))
        },
        crate::math::ln(gamma0),
    )?;
    let report = reports.into_iter().rev().find(|(t, _)| *t == out.t).map(|(_, r)| r);
    Ok(OScalingResult {
        gamma: exp(out.t),
        value: out.value,
        derivative: out.derivative,
        iterations: out.iterations,
        converged: out.converged,
        report,
    })
}

/// Newton on `log γ` for the BQP objective at a fixed point `(x, X)`, where
/// both derivatives are exact.
pub fn optimize_o_scaling_point(p: &BqpPoint, c: &SymMatrix, gamma0: f64) -> Result<OScalingResult> {
    let n = p.x.len();
    let out = newton_1d(
        |t| {
            let sv = ScalingVector::uniform(n, exp(t))?;
            let v = bqp::value(p, &sv, c);
            let g = bqp::grad_log_scaling(p, &sv, c).ok_or_else(|| Error::Domain("BQP matrix not PD".into()))?;
            let h = bqp::hessian_log_scaling(p, &sv, c).ok_or_else(|| Error::Domain("BQP matrix not PD".into()))?;
            Ok((v, g.iter().sum(), h.as_matrix().as_slice().iter().sum()))
        },
        crate::math::ln(gamma0),
    )?;
    Ok(OScalingResult {
        gamma: exp(out.t),
        value: out.value,
        derivative: out.derivative,
        iterations: out.iterations,
        converged: out.converged,
        report: None,
    })
}

struct Newton1d {
    t: f64,
    value: f64,
    derivative: f64,
    iterations: usize,
    converged: bool,
}

/// Minimizes a convex `φ` given `(φ, φ', φ'')` by Newton steps kept inside
/// a bracket `φ'(lo) < 0 < φ'(hi)`; bisects when Newton leaves it, and
/// expands geometrically until a bracket exists.
fn newton_1d(mut eval: impl FnMut(f64) -> Result<(f64, f64, f64)>, t0: f64) -> Result<Newton1d> {
    let (phi0, d0, h0) = eval(t0)?;
    if !phi0.is_finite() || !d0.is_finite() {
        return Err(Error::Numerical("non-finite scaling derivative".into()));
    }
    let (mut t, mut d, mut h) = (t0, d0, h0);
    let mut best = (t0, phi0, d0);
    let mut hit: Option<(f64, f64, f64)> = None;
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut expand = 1.0;
    let mut iterations = 0;
    if d0.abs() < tol::O_SCALING_DERIVATIVE {
        hit = Some(best);
    }
    while hit.is_none() && iterations < tol::O_SCALING_MAX_ITER {
        iterations += 1;
        if d < 0.0 {
            lo = lo.max(t);
        } else {
            hi = hi.min(t);
        }
        let newton = if h > 0.0 && h.is_finite() { t - d / h } else { f64::NAN };
        let next = if newton > lo && newton < hi && (newton - t).abs() <= 10.0 {
            newton
        } else if lo.is_finite() && hi.is_finite() {
            0.5 * (lo + hi)
        } else {
            let step = if d < 0.0 { expand } else { -expand };
            expand *= 2.0;
            t + step
        };
        let (phi, dn, hn) = eval(next)?;
        if !phi.is_finite() || !dn.is_finite() {
            return Err(Error::Numerical("non-finite scaling derivative".into()));
        }
        t = next;
        d = dn;
        h = hn;
        if phi < best.1 {
            best = (t, phi, d);
        }
        if d.abs() < tol::O_SCALING_DERIVATIVE && phi <= phi0 + 1e-9 {
            hit = Some((t, phi, d));
        }
        if lo.is_finite() && hi.is_finite() && hi - lo <= 1e-15 * (1.0 + t.abs()) {
            break;
        }
    }
    let (t, value, derivative) = hit.unwrap_or(best);
    Ok(Newton1d { t, value, derivative, iterations, converged: hit.is_some() })
}
