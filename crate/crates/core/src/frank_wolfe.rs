//! Conditional-gradient maximization of a concave function over a
//! [`Polytope`], with away steps and a duality-gap certificate.
//!
//! For concave `f` and any feasible `x`,
//! `max f ≤ f(x) + max_v ∇f(x)ᵀ(v - x)`, where `v` ranges over the
//! vertices. The second term is the Frank-Wolfe gap; `value + gap` is the
//! certified upper bound reported by [`SolveReport::certified_bound`].

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::dot;
use crate::polytope::Polytope;
use crate::tol;

/// Relative rounding noise of one objective evaluation, per variable: a
/// log-determinant from an `n × n` factorization carries roughly `n·ε`
/// relative error.
const VALUE_NOISE: f64 = 4.0 * f64::EPSILON;

/// A concave objective that may be undefined (`-∞`) outside its domain.
pub trait ConcaveObjective {
    /// `f(x)`, or `f64::NEG_INFINITY` outside the domain.
    fn value(&self, x: &[f64]) -> f64;

    /// `∇f(x)`, or `None` outside the domain.
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>>;

    /// Maximizer of `t ↦ f(x + t·d)` on `[0, t_max]`, when the objective
    /// has a better method than golden-section search.
    fn line_search(&self, _x: &[f64], _d: &[f64], _t_max: f64) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FwOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub away_steps: bool,
    /// Stop as soon as the objective value reaches this level.
    pub stop_above: Option<f64>,
}

impl Default for FwOptions {
    fn default() -> Self {
        FwOptions { tol: tol::FW_GAP, max_iter: tol::FW_MAX_ITER, away_steps: true, stop_above: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub value: f64,
    /// Frank-Wolfe gap at `x`, clamped at zero.
    pub gap: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl SolveReport {
    pub fn certified_bound(&self) -> f64 {
        self.value + self.gap
    }
}

struct ActiveSet {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl ActiveSet {
    fn fw_update(&mut self, v: Vec<f64>, t: f64) {
        if t >= 1.0 {
            self.atoms = alloc::vec![v];
            self.weights = alloc::vec![1.0];
            return;
        }
        for w in &mut self.weights {
            *w *= 1.0 - t;
        }
        match self.atoms.iter().position(|a| *a == v) {
            Some(i) => self.weights[i] += t,
            None => {
                self.atoms.push(v);
                self.weights.push(t);
            }
        }
    }

    fn away_update(&mut self, i: usize, t: f64, drop: bool) {
        for w in &mut self.weights {
            *w *= 1.0 + t;
        }
        self.weights[i] -= t;
        if drop || self.weights[i] <= 1e-15 {
            self.atoms.swap_remove(i);
            self.weights.swap_remove(i);
            let total: f64 = self.weights.iter().sum();
            for w in &mut self.weights {
                *w /= total;
            }
        }
    }
}

/// Maximizes `f` over `poly`.
///
/// `start` is used when it is feasible and inside the domain; otherwise the
/// start is the average of [`Polytope::spread_vertices`].
pub fn maximize<F>(poly: &Polytope, f: &F, start: Option<&[f64]>, opts: FwOptions) -> Result<SolveReport>
where
    F: ConcaveObjective + ?Sized,
{
    let n = poly.n();
    let mut active = initial_active_set(poly, f, start)?;
    let mut x = combine(&active, n);
    let mut fx = f.value(&x);
    if !fx.is_finite() {
        return Err(Error::Domain("starting point is outside the objective's domain".into()));
    }

    let noise = VALUE_NOISE * n.max(1) as f64;
    let mut iterations = 0;
    loop {
        let g = f.gradient(&x).ok_or_else(|| Error::Domain("gradient undefined at an iterate".into()))?;
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite gradient".into()));
        }
        let v = poly.lp_max(&g);
        let gx = dot(&g, &x);
        let gap = (dot(&g, &v) - gx).max(0.0);
        let reached = opts.stop_above.is_some_and(|level| fx >= level);
        if gap <= opts.tol || iterations >= opts.max_iter || reached {
            return Ok(SolveReport { x, value: fx, gap, gradient: g, iterations, converged: gap <= opts.tol });
        }
        iterations += 1;

        let away = if opts.away_steps && active.atoms.len() > 1 {
            let (i, ga) = active
                .atoms
                .iter()
                .enumerate()
                .map(|(i, a)| (i, dot(&g, a)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            let away_gap = gx - ga;
            (away_gap > gap).then_some(i)
        } else {
            None
        };

        let (d, t_max) = match away {
            Some(i) => {
                let w = active.weights[i];
                let d: Vec<f64> = x.iter().zip(&active.atoms[i]).map(|(xi, ai)| xi - ai).collect();
                (d, w / (1.0 - w))
            }
            None => (v.iter().zip(&x).map(|(vi, xi)| vi - xi).collect(), 1.0),
        };

        let t = line_search(f, &x, &d, t_max, fx);
        let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
        let f_trial = if t > 0.0 { f.value(&trial) } else { fx };
        // Near the optimum true improvements drop below the rounding noise
        // of `f`; steps inside that band are still taken.
        if !(t > 0.0) || !(f_trial >= fx - noise * (1.0 + fx.abs())) {
            // No numerically improving step along this direction; the gap
            // stays above tolerance and is reported as such.
            return Ok(SolveReport { x, value: fx, gap, gradient: g, iterations, converged: false });
        }
        match away {
            Some(i) => active.away_update(i, t, t >= t_max * (1.0 - 1e-12)),
            None => active.fw_update(v, t),
        }
        x = trial;
        fx = f_trial;
    }
}

fn initial_active_set<F>(poly: &Polytope, f: &F, start: Option<&[f64]>) -> Result<ActiveSet>
where
    F: ConcaveObjective + ?Sized,
{
    if let Some(x0) = start {
        if poly.contains(x0, tol::FEASIBILITY) && f.value(x0).is_finite() {
            return Ok(ActiveSet { atoms: alloc::vec![x0.to_vec()], weights: alloc::vec![1.0] });
        }
    }
    let atoms = poly.spread_vertices();
    let k = atoms.len();
    let set = ActiveSet { atoms, weights: alloc::vec![1.0 / k as f64; k] };
    let x = combine(&set, poly.n());
    if f.value(&x).is_finite() {
        Ok(set)
    } else {
        Err(Error::Domain("no interior starting point in the objective's domain".into()))
    }
}

fn combine(set: &ActiveSet, n: usize) -> Vec<f64> {
    let mut x = alloc::vec![0.0; n];
    for (a, &w) in set.atoms.iter().zip(&set.weights) {
        for (xi, ai) in x.iter_mut().zip(a) {
            *xi += w * ai;
        }
    }
    x
}

fn line_search<F>(f: &F, x: &[f64], d: &[f64], t_max: f64, f0: f64) -> f64
where
    F: ConcaveObjective + ?Sized,
{
    if let Some(t) = f.line_search(x, d, t_max) {
        return t.clamp(0.0, t_max);
    }
    golden_section(|t| f.value(&step(x, d, t)), t_max, f0)
}

fn step(x: &[f64], d: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + t * di).collect()
}

/// Golden-section search for the maximizer of a concave `phi` on
/// `[0, t_max]`; `-∞` values are treated as outside the domain.
pub fn golden_section(phi: impl Fn(f64) -> f64, t_max: f64, phi0: f64) -> f64 {
    const R: f64 = 0.618_033_988_749_894_8;
    let mut best = (0.0, phi0);
    let f_end = phi(t_max);
    if f_end > best.1 {
        best = (t_max, f_end);
    }
    let (mut a, mut b) = (0.0, t_max);
    let mut c = b - R * (b - a);
    let mut d = a + R * (b - a);
    let mut fc = phi(c);
    let mut fd = phi(d);
    let width = 1e-10 * t_max.max(1e-300);
    for _ in 0..200 {
        if b - a <= width {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - R * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + R * (b - a);
            fd = phi(d);
        }
    }
    for (t, v) in [(c, fc), (d, fd)] {
        if v > best.1 {
            best = (t, v);
        }
    }
    best.0
}

/// Root of the nonincreasing slope `dphi` of a concave `phi` on
/// `[0, t_max]`, by regula falsi with the Illinois modification. `dphi`
/// returns `None` outside the domain, which counts as a negative slope.
/// Returns `t_max` when the slope is still nonnegative there.
pub fn slope_root(dphi: impl Fn(f64) -> Option<f64>, slope0: f64, t_max: f64) -> f64 {
    if !(slope0 > 0.0) {
        return 0.0;
    }
    let end = dphi(t_max);
    if end.is_some_and(|v| v >= 0.0) {
        return t_max;
    }
    let (mut a, mut fa) = (0.0, slope0);
    let (mut b, mut fb) = (t_max, end.filter(|v| v.is_finite()));
    let mut side = 0i8;
    for _ in 0..100 {
        if b - a <= 1e-12 * t_max {
            break;
        }
        let t = match fb {
            Some(vb) => {
                let t = (a * vb - b * fa) / (vb - fa);
                // Keep the secant point well inside the bracket.
                t.clamp(a + 0.01 * (b - a), b - 0.01 * (b - a))
            }
            None => 0.5 * (a + b),
        };
        match dphi(t) {
            Some(v) if v == 0.0 => return t,
            Some(v) if v > 0.0 => {
                a = t;
                fa = v;
                if side == 1 {
                    fb = fb.map(|x| 0.5 * x);
                }
                side = 1;
            }
            Some(v) if v.is_finite() => {
                b = t;
                fb = Some(v);
                if side == -1 {
                    fa *= 0.5;
                }
                side = -1;
            }
            _ => {
                b = t;
                fb = None;
                side = 0;
            }
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::Polytope;
    use alloc::vec;

    struct Linear(Vec<f64>);

    impl ConcaveObjective for Linear {
        fn value(&self, x: &[f64]) -> f64 {
            dot(&self.0, x)
        }
        fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
            Some(self.0.clone())
        }
    }

    /// `-‖x - p‖²`.
    struct Quadratic(Vec<f64>);

    impl ConcaveObjective for Quadratic {
        fn value(&self, x: &[f64]) -> f64 {
            -x.iter().zip(&self.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        }
        fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
            Some(x.iter().zip(&self.0).map(|(a, b)| -2.0 * (a - b)).collect())
        }
    }

    #[test]
    fn linear_objective_finishes_in_one_step() {
        let poly = Polytope::new(4, 2, None, None).unwrap();
        let f = Linear(vec![3.0, 1.0, 2.0, 0.0]);
        let r = maximize(&poly, &f, None, FwOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 1);
        assert!((r.value - 5.0).abs() < 1e-12);
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn projection_onto_face() {
        // Closest point to p in {Σx = 2, 0 ≤ x ≤ 1}: shift by the mean excess.
        let poly = Polytope::new(4, 2, None, None).unwrap();
        let f = Quadratic(vec![0.9, 0.8, 0.4, 0.1]);
        let r = maximize(&poly, &f, None, FwOptions { tol: 1e-9, ..Default::default() }).unwrap();
        assert!(r.converged, "gap {}", r.gap);
        for (xi, e) in r.x.iter().zip([0.85, 0.75, 0.35, 0.05]) {
            assert!((xi - e).abs() < 1e-6, "{:?}", r.x);
        }
    }

    #[test]
    fn values_never_decrease_and_certificate_holds() {
        let poly = Polytope::new(5, 2, None, None).unwrap();
        let f = Quadratic(vec![1.2, -0.3, 0.5, 0.9, 0.1]);
        let mut last = f64::NEG_INFINITY;
        for iters in 0..30 {
            let r = maximize(&poly, &f, None, FwOptions { tol: 0.0, max_iter: iters, ..Default::default() }).unwrap();
            assert!(r.value >= last - 1e-15);
            last = r.value;
            for v in poly.spread_vertices() {
                assert!(f.value(&v) <= r.certified_bound() + 1e-12);
            }
        }
    }

    #[test]
    fn golden_section_finds_interior_max() {
        let t = golden_section(|t| -(t - 0.3) * (t - 0.3), 1.0, -0.09);
        assert!((t - 0.3).abs() < 1e-8);
        let t = golden_section(|t| if t > 0.5 { f64::NEG_INFINITY } else { t }, 1.0, 0.0);
        assert!(t <= 0.5 && t > 0.49);
    }
}
