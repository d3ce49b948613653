//! Common front end for the solvable relaxations.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::frank_wolfe::{FwOptions, SolveReport};
use crate::instance::{Instance, ScalingVector};
use crate::polytope::Pin;
use crate::{ddfact, linx, tol};

/// A relaxation that can be solved to a certified upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Linx,
    Ddfact,
    /// DDFact on the complementary instance, shifted by `ldet C`.
    DdfactComp,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Linx, Method::Ddfact, Method::DdfactComp];

    pub fn name(self) -> &'static str {
        match self {
            Method::Linx => "linx",
            Method::Ddfact => "ddfact",
            Method::DdfactComp => "ddfact-comp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linx" => Ok(Method::Linx),
            "ddfact" => Ok(Method::Ddfact),
            "ddfact-comp" | "ddfact_comp" => Ok(Method::DdfactComp),
            other => Err(Error::InvalidInput(alloc::format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Frank-Wolfe gap tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Starting point in the original coordinates; ignored when infeasible.
    pub warm_start: Option<Vec<f64>>,
    /// Per-coordinate pins in the original coordinates.
    pub pins: Option<Vec<Pin>>,
    /// Stop once the relaxation value (in original terms) reaches this level.
    pub stop_above: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: tol::FW_GAP, max_iter: tol::FW_MAX_ITER, warm_start: None, pins: None, stop_above: None }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions { tol, ..Default::default() }
    }

    pub(crate) fn fw_options(&self) -> FwOptions {
        FwOptions { tol: self.tol, max_iter: self.max_iter, away_steps: true, stop_above: self.stop_above }
    }
}

/// A certified upper bound and the relaxation point behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub method: Method,
    /// `value + gap`: an upper bound on the relaxation optimum, hence on z.
    pub upper_bound: f64,
    pub value: f64,
    pub gap: f64,
    /// Relaxation solution, in the original coordinates.
    pub x: Vec<f64>,
    /// Objective gradient at `x`, in the original coordinates.
    pub gradient: Vec<f64>,
    /// Scaling used; for [`Method::DdfactComp`] it scales the complementary
    /// instance.
    pub scaling: ScalingVector,
    pub iterations: usize,
    pub converged: bool,
    /// Filled in by callers that time the solve.
    pub wall_ms: Option<f64>,
}

impl BoundReport {
    /// Maps a solve in possibly complemented coordinates (`y = e - x`)
    /// back to the original problem.
    pub(crate) fn from_solve(
        method: Method,
        r: SolveReport,
        scaling: ScalingVector,
        offset: f64,
        complemented: bool,
    ) -> Self {
        let (x, gradient) = if complemented {
            (r.x.iter().map(|y| 1.0 - y).collect(), r.gradient.iter().map(|g| -g).collect())
        } else {
            (r.x, r.gradient)
        };
        BoundReport {
            method,
            upper_bound: r.value + r.gap + offset,
            value: r.value + offset,
            gap: r.gap,
            x,
            gradient,
            scaling,
            iterations: r.iterations,
            converged: r.converged,
            wall_ms: None,
        }
    }
}

/// Solves `method` on `inst` with the given scaling.
pub fn solve(method: Method, inst: &Instance, scaling: &ScalingVector, opts: &SolveOptions) -> Result<BoundReport> {
    match method {
        Method::Linx => linx::solve(inst, scaling, opts),
        Method::Ddfact => ddfact::solve(inst, scaling, opts),
        Method::DdfactComp => ddfact::solve_complement(inst, scaling, opts),
    }
}
