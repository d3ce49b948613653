//! Fixing variables by probing.
//!
//! Given a valid lower bound `lb`, a variable can be fixed to 0 when every
//! solution with `x_j = 1` is provably worse than `lb`, and to 1 when every
//! solution with `x_j = 0` is. The proof is a certified relaxation bound
//! with `x_j` pinned. Before solving a probe we try the linearization
//! screen: if `x̂` maximizes the unpinned relaxation with gradient `g`,
//! concavity gives `max_{P_j} f ≤ f(x̂) + max_{v ∈ P_j} gᵀ(v - x̂)`, which costs
//! one LP.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::heuristics::{local_search_locked, Incumbent};
use crate::instance::{Instance, ScalingVector};
use crate::polytope::{Pin, Polytope};
use crate::relax::{Method, SolveOptions};
use crate::scaling::{optimize_g_scaling_with, optimize_o_scaling_with, BoundFunction, ScalingOptions};
use crate::tol;

/// How the scaling is chosen before each fixing pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingMode {
    None,
    /// Best uniform scaling (linx); DDFact is invariant and keeps `e`.
    O,
    /// A few BFGS steps on the full vector, from the best uniform scaling.
    G,
}

impl ScalingMode {
    pub fn name(self) -> &'static str {
        match self {
            ScalingMode::None => "none",
            ScalingMode::O => "o",
            ScalingMode::G => "g",
        }
    }
}

impl core::str::FromStr for ScalingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ScalingMode::None),
            "o" => Ok(ScalingMode::O),
            "g" => Ok(ScalingMode::G),
            other => Err(Error::InvalidInput(alloc::format!("unknown scaling mode '{other}'"))),
        }
    }
}

/// What proved a fix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evidence {
    /// The linearization screen.
    Screen,
    /// A solved probe.
    Probe,
    /// The opposite pin leaves no feasible point.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRecord {
    /// Index in the original instance.
    pub index: usize,
    /// The value the variable is fixed to (`Pin::Zero` or `Pin::One`).
    pub fixed_to: Pin,
    pub method: Method,
    /// Certified bound with the opposite pin; `-∞` when infeasible.
    pub probe_bound: f64,
    /// `lb - probe_bound`.
    pub margin: f64,
    pub evidence: Evidence,
    pub round: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// A full round over the methods fixed nothing.
    NoProgress,
    /// Every variable is fixed.
    Decided,
    /// The round budget ran out.
    Budget,
    /// A contraction left fewer than `s` usable directions; the lower bound
    /// or the numerics are suspect.
    Degenerate,
}

#[derive(Debug, Clone)]
pub struct FixResult {
    /// Sorted indices fixed to 0.
    pub fix0: Vec<usize>,
    /// Sorted indices fixed to 1.
    pub fix1: Vec<usize>,
    /// Lower bound in force at the end (never below the input).
    pub lb: f64,
    pub probes: Vec<ProbeRecord>,
    pub rounds: usize,
    pub stop: StopReason,
    /// Relaxations solved, including screens' base solves.
    pub solves: usize,
    /// `ldet C[fix1, fix1]` when the fixes decide the instance.
    pub decided_value: Option<f64>,
}

impl FixResult {
    fn empty(lb: f64, stop: StopReason) -> Self {
        FixResult { fix0: vec![], fix1: vec![], lb, probes: vec![], rounds: 0, stop, solves: 0, decided_value: None }
    }

    pub fn fixed_count(&self) -> usize {
        self.fix0.len() + self.fix1.len()
    }
}

/// Probe options.
#[derive(Debug, Clone)]
pub struct ProbeOptions {
    /// Inner tolerance of base solves and probes.
    pub tol: f64,
    pub max_iter: usize,
    /// Try the linearization screen before solving a probe.
    pub screen: bool,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions { tol: tol::PROBE_GAP, max_iter: tol::FW_MAX_ITER, screen: true }
    }
}

/// One pass of probing on `inst` with the given pins; indices in the
/// result refer to `inst`. Already pinned variables are not probed.
pub fn probe_fix(inst: &Instance, lb: f64, method: Method, scaling: &ScalingVector) -> Result<FixResult> {
    let pins = vec![Pin::Free; inst.n()];
    let bound = BoundFunction::new(method, inst)?;
    probe_fix_with(&bound, lb, scaling, &pins, &ProbeOptions::default(), 0)
}

pub fn probe_fix_with(
    bound: &BoundFunction<'_>,
    lb: f64,
    scaling: &ScalingVector,
    pins: &[Pin],
    opts: &ProbeOptions,
    round: usize,
) -> Result<FixResult> {
    let mut out = FixResult::empty(lb, StopReason::NoProgress);
    if !lb.is_finite() {
        return Ok(out);
    }
    let inst = bound.instance();
    let level = lb - tol::FIX_MARGIN;
    let base_opts = SolveOptions {
        tol: opts.tol,
        max_iter: opts.max_iter,
        warm_start: None,
        pins: Some(pins.to_vec()),
        stop_above: None,
    };
    let base = bound.solve(scaling, &base_opts)?;
    out.solves += 1;
    let poly = Polytope::for_instance(inst, Some(pins))?;

    for j in 0..inst.n() {
        if pins[j] != Pin::Free {
            continue;
        }
        for (probe_pin, fixed_to) in [(Pin::One, Pin::Zero), (Pin::Zero, Pin::One)] {
            let record = |probe_bound: f64, evidence: Evidence| ProbeRecord {
                index: j,
                fixed_to,
                method: bound.method(),
                probe_bound,
                margin: lb - probe_bound,
                evidence,
                round,
            };
            let xj = base.x[j];
            let satisfies = match probe_pin {
                Pin::One => xj >= 1.0 - tol::FEASIBILITY,
                _ => xj <= tol::FEASIBILITY,
            };
            if satisfies && base.value >= level {
                continue;
            }
            let pinned = match poly.with_pin(j, probe_pin) {
                Ok(p) => p,
                Err(Error::Infeasible) => {
                    out.probes.push(record(f64::NEG_INFINITY, Evidence::Infeasible));
                    continue;
                }
                Err(e) => return Err(e),
            };
            if opts.screen {
                let v = pinned.lp_max(&base.gradient);
                let lift: f64 = base.gradient.iter().zip(v.iter().zip(&base.x)).map(|(g, (v, x))| g * (v - x)).sum();
                let screen = base.value + lift;
                if screen < level {
                    out.probes.push(record(screen, Evidence::Screen));
                    continue;
                }
            }
            let mut probe_pins = pins.to_vec();
            probe_pins[j] = probe_pin;
            let probe_opts = SolveOptions { pins: Some(probe_pins), stop_above: Some(level), ..base_opts.clone() };
            out.solves += 1;
            match bound.solve(scaling, &probe_opts) {
                Ok(r) if r.upper_bound < level && r.gap <= tol::PROBE_GAP => {
                    out.probes.push(record(r.upper_bound, Evidence::Probe));
                }
                Ok(_) => {}
                Err(Error::Infeasible) => out.probes.push(record(f64::NEG_INFINITY, Evidence::Infeasible)),
                // A probe the relaxation cannot handle proves nothing.
                Err(_) => {}
            }
        }
    }

    for p in &out.probes {
        match p.fixed_to {
            Pin::Zero => out.fix0.push(p.index),
            _ => out.fix1.push(p.index),
        }
    }
    if let Some(&j) = out.fix0.iter().find(|j| out.fix1.contains(j)) {
        return Err(Error::InconsistentLowerBound(j));
    }
    Ok(out)
}

/// Fixing loop options.
#[derive(Debug, Clone)]
pub struct FixOptions {
    pub methods: Vec<Method>,
    pub mode: ScalingMode,
    /// BFGS steps per scaling update in g-mode.
    pub bfgs_steps: usize,
    pub max_rounds: usize,
    pub probe: ProbeOptions,
}

impl Default for FixOptions {
    fn default() -> Self {
        FixOptions {
            methods: Method::ALL.to_vec(),
            mode: ScalingMode::G,
            bfgs_steps: 10,
            max_rounds: 20,
            probe: ProbeOptions::default(),
        }
    }
}

impl FixOptions {
    pub fn with_mode(mode: ScalingMode) -> Self {
        FixOptions { mode, ..Default::default() }
    }
}

/// Repeats rounds over `opts.methods`: re-tune the scaling on the current
/// instance, probe, delete variables fixed to 0 and pin those fixed to 1.
/// Stops when a full round fixes nothing. `incumbent` (if any) must be a
/// feasible set achieving `lb`; it is improved by local search after every
/// contraction.
pub fn iterate_fixing(inst: &Instance, lb: f64, incumbent: Option<&Incumbent>, opts: &FixOptions) -> Result<FixResult> {
    let n = inst.n();
    let s = inst.s();
    let mut keep: Vec<usize> = (0..n).collect();
    let mut pins = vec![Pin::Free; n];
    let mut cur = inst.clone();
    let mut lb = lb;
    let mut best_set: Option<Vec<usize>> = incumbent.map(|i| i.set.clone());
    let mut result = FixResult::empty(lb, StopReason::Budget);
    if !lb.is_finite() {
        result.stop = StopReason::NoProgress;
        return Ok(result);
    }

    'rounds: while result.rounds < opts.max_rounds {
        result.rounds += 1;
        let mut progress = false;
        for &method in &opts.methods {
            if decide_if_forced(&keep, &pins, s, &mut result) {
                break 'rounds;
            }
            let bound = match BoundFunction::new(method, &cur) {
                Ok(b) => b,
                Err(Error::ComplementUnavailable) => continue,
                Err(e) => return Err(e),
            };
            let scaling = match tune_scaling(&bound, &pins, opts, &mut result.solves) {
                Some(sv) => sv,
                None => continue,
            };
            let pass = match probe_fix_with(&bound, lb, &scaling, &pins, &opts.probe, result.rounds) {
                Ok(p) => p,
                Err(e @ Error::InconsistentLowerBound(_)) => return Err(e),
                Err(_) => continue,
            };
            result.solves += pass.solves;
            if pass.fixed_count() == 0 {
                continue;
            }
            progress = true;
            for mut p in pass.probes {
                p.index = keep[p.index];
                result.probes.push(p);
            }
            for &j in &pass.fix1 {
                pins[j] = Pin::One;
                result.fix1.push(keep[j]);
            }
            let dropped: Vec<usize> = pass.fix0.iter().map(|&j| keep[j]).collect();
            result.fix0.extend_from_slice(&dropped);
            let survivors: Vec<usize> = (0..keep.len()).filter(|j| !pass.fix0.contains(j)).collect();
            keep = survivors.iter().map(|&j| keep[j]).collect();
            pins = survivors.iter().map(|&j| pins[j]).collect();
            if keep.len() < s {
                return Err(Error::InconsistentLowerBound(dropped[0]));
            }
            // A decided instance may be too small to restrict to (s = n).
            if decide_if_forced(&keep, &pins, s, &mut result) {
                break 'rounds;
            }
            cur = match inst.restrict(&keep) {
                Ok(c) => c,
                Err(_) => {
                    result.stop = StopReason::Degenerate;
                    break 'rounds;
                }
            };
            if let Some(set) = &best_set {
                let local: Option<Vec<usize>> = set.iter().map(|j| keep.binary_search(j).ok()).collect();
                if let Some(local) = local {
                    let locked: Vec<usize> = (0..keep.len()).filter(|&j| pins[j] == Pin::One).collect();
                    let improved = local_search_locked(&cur, &Incumbent::from_set(&cur, &local), &locked);
                    if improved.feasible && improved.value > lb {
                        lb = improved.value;
                        best_set = Some(improved.set.iter().map(|&j| keep[j]).collect());
                    }
                }
            }
        }
        if decide_if_forced(&keep, &pins, s, &mut result) {
            break;
        }
        if !progress {
            result.stop = StopReason::NoProgress;
            break;
        }
    }
    result.fix0.sort_unstable();
    result.fix1.sort_unstable();
    result.lb = lb;
    if result.stop == StopReason::Decided {
        result.decided_value = Some(inst.subset_ldet(&result.fix1));
    }
    Ok(result)
}

/// When the pins already determine the solution, fixes everything else.
fn decide_if_forced(keep: &[usize], pins: &[Pin], s: usize, result: &mut FixResult) -> bool {
    let ones = pins.iter().filter(|&&p| p == Pin::One).count();
    if keep.len() == s {
        for (j, &p) in pins.iter().enumerate() {
            if p == Pin::Free {
                result.fix1.push(keep[j]);
            }
        }
    } else if ones == s {
        for (j, &p) in pins.iter().enumerate() {
            if p == Pin::Free {
                result.fix0.push(keep[j]);
            }
        }
    } else {
        return false;
    }
    result.stop = StopReason::Decided;
    true
}

/// The scaling for one fixing pass, or `None` when the bound cannot be
/// evaluated on the current instance.
fn tune_scaling(bound: &BoundFunction<'_>, pins: &[Pin], opts: &FixOptions, solves: &mut usize) -> Option<ScalingVector> {
    let n = bound.scaled_instance().n();
    let mut sopts = ScalingOptions::with_steps(opts.bfgs_steps);
    sopts.inner.pins = Some(pins.to_vec());
    let start = match (opts.mode, bound.method()) {
        (ScalingMode::None, _) => return Some(ScalingVector::ones(n)),
        (_, Method::Linx) => {
            let o = optimize_o_scaling_with(bound, 1.0, &sopts).ok()?;
            *solves += o.iterations + 1;
            ScalingVector::uniform(n, o.gamma).ok()?
        }
        _ => ScalingVector::ones(n),
    };
    if opts.mode == ScalingMode::O {
        return Some(start);
    }
    match optimize_g_scaling_with(bound, &start, &sopts) {
        Ok(r) => {
            *solves += r.solves;
            Some(r.scaling)
        }
        Err(_) => Some(start),
    }
}
