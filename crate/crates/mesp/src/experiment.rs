//! The benchmark runner: for each `s`, every requested (method, scaling)
//! pair is solved and reported against a heuristic lower bound.
//!
//! CSV columns: `n,s,method,scaling,ub,lb,gap,ratio,iters,wall_ms,seed,error`.
//! `ratio` is the gap decrease of g-scaling relative to o-scaling,
//! `(gap_o - gap_g)/gap_o`, filled on `g` rows when the `o` row of the same
//! method exists and `gap_o > 0`. `iters` counts Frank-Wolfe iterations for
//! `none`, Newton iterations for `o` and BFGS steps for `g`.

use std::io::Write;
use std::time::Instant;

use mesp_core::fixing::ScalingMode;
use mesp_core::heuristics::{greedy_construct, local_search};
use mesp_core::relax::{self, BoundReport, Method, SolveOptions};
use mesp_core::scaling::{optimize_g_scaling, optimize_o_scaling, ScalingOptions};
use mesp_core::{Constraints, Instance, ScalingVector, SymMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Error;
use crate::gen::gen_side_constraints;

pub const CSV_HEADER: [&str; 12] = ["n", "s", "method", "scaling", "ub", "lb", "gap", "ratio", "iters", "wall_ms", "seed", "error"];

#[derive(Debug, Clone)]
pub enum ConstraintSource {
    None,
    Given(Constraints),
    /// Generate this many rows for every `s`.
    Generate(usize),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub covariance: SymMatrix,
    pub constraints: ConstraintSource,
    pub s_values: Vec<usize>,
    pub methods: Vec<Method>,
    pub scalings: Vec<ScalingMode>,
    pub scaling_steps: usize,
    pub tol: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub n: usize,
    pub s: usize,
    pub method: Method,
    pub scaling: ScalingMode,
    pub upper_bound: Option<f64>,
    pub lower_bound: Option<f64>,
    pub gap: Option<f64>,
    pub ratio: Option<f64>,
    pub iterations: usize,
    pub wall_ms: f64,
    pub seed: u64,
    pub error: Option<String>,
}

/// Runs every `s` in parallel; rows come back in `(s, method, scaling)`
/// order regardless of completion order.
pub fn run(cfg: &ExperimentConfig) -> Vec<ExperimentRow> {
    cfg.s_values.par_iter().map(|&s| run_one(cfg, s)).collect::<Vec<_>>().into_iter().flatten().collect()
}

fn rng_for(seed: u64, s: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s as u64);
    rng
}

fn build_instance(cfg: &ExperimentConfig, s: usize) -> Result<Instance, Error> {
    let plain = Instance::new(cfg.covariance.clone(), s, None)?;
    match &cfg.constraints {
        ConstraintSource::None => Ok(plain),
        ConstraintSource::Given(c) => Ok(plain.with_constraints(Some(c.clone()))?),
        ConstraintSource::Generate(m) => gen_side_constraints(&plain, *m, &mut rng_for(cfg.seed, s)),
    }
}

fn run_one(cfg: &ExperimentConfig, s: usize) -> Vec<ExperimentRow> {
    let n = cfg.covariance.order();
    let blank = |method, scaling| ExperimentRow {
        n,
        s,
        method,
        scaling,
        upper_bound: None,
        lower_bound: None,
        gap: None,
        ratio: None,
        iterations: 0,
        wall_ms: 0.0,
        seed: cfg.seed,
        error: None,
    };
    let setup = build_instance(cfg, s).and_then(|inst| {
        let lb = local_search(&inst, &greedy_construct(&inst)?).value;
        Ok((inst, lb))
    });
    let (inst, lb) = match setup {
        Ok(v) => v,
        Err(e) => {
            return cfg
                .methods
                .iter()
                .flat_map(|&m| cfg.scalings.iter().map(move |&sc| (m, sc)))
                .map(|(m, sc)| ExperimentRow { error: Some(e.to_string()), ..blank(m, sc) })
                .collect();
        }
    };

    let mut rows = Vec::new();
    for &method in &cfg.methods {
        let mut gamma_o = None;
        let mut gap_o = None;
        for &scaling in &cfg.scalings {
            let start = Instant::now();
            let outcome = scaled_bound(&inst, method, scaling, cfg.scaling_steps, cfg.tol, gamma_o);
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            let mut row = ExperimentRow { lower_bound: Some(lb), wall_ms, ..blank(method, scaling) };
            match outcome {
                Ok(b) => {
                    let gap = b.report.upper_bound - lb;
                    row.upper_bound = Some(b.report.upper_bound);
                    row.gap = Some(gap);
                    row.iterations = b.iterations;
                    if scaling == ScalingMode::O {
                        gamma_o = b.gamma;
                        gap_o = Some(gap);
                    }
                    if scaling == ScalingMode::G {
                        row.ratio = gap_o.filter(|&g| g > 0.0).map(|g| (g - gap) / g);
                    }
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            rows.push(row);
        }
    }
    rows
}

/// A bound after scaling, with the iteration count that goes in the CSV.
#[derive(Debug, Clone)]
pub struct ScaledBound {
    pub report: BoundReport,
    pub iterations: usize,
    /// The uniform scaling used, when the bound is o-scaled or unscaled.
    pub gamma: Option<f64>,
}

/// Solves `method` under the given scaling mode. For linx, g-scaling starts
/// from `gamma_o` when known and otherwise optimizes it first; DDFact is
/// invariant under uniform rescaling, so its o-scaling is `e` and its
/// g-scaling starts there.
pub fn scaled_bound(
    inst: &Instance,
    method: Method,
    mode: ScalingMode,
    steps: usize,
    tol: f64,
    gamma_o: Option<f64>,
) -> Result<ScaledBound, Error> {
    let n = inst.n();
    let mut sopts = ScalingOptions::with_steps(steps);
    sopts.inner.tol = sopts.inner.tol.min(tol);
    match (mode, method) {
        (ScalingMode::None, _) | (ScalingMode::O, Method::Ddfact | Method::DdfactComp) => {
            let r = relax::solve(method, inst, &ScalingVector::ones(n), &SolveOptions::with_tol(tol))?;
            Ok(ScaledBound { iterations: r.iterations, report: r, gamma: Some(1.0) })
        }
        (ScalingMode::O, Method::Linx) => {
            let o = optimize_o_scaling(method, inst, 1.0, &sopts)?;
            let report = o.report.ok_or_else(|| Error::Usage("o-scaling produced no bound".into()))?;
            Ok(ScaledBound { report, iterations: o.iterations, gamma: Some(o.gamma) })
        }
        (ScalingMode::G, _) => {
            let gamma = match (method, gamma_o) {
                (Method::Linx, Some(g)) => g,
                (Method::Linx, None) => optimize_o_scaling(method, inst, 1.0, &sopts)?.gamma,
                _ => 1.0,
            };
            let start = ScalingVector::uniform(n, gamma)?;
            let g = optimize_g_scaling(method, inst, &start, &sopts)?;
            Ok(ScaledBound { report: g.report, iterations: g.trace.len() - 1, gamma: None })
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.s.to_string(),
            r.method.name().to_string(),
            r.scaling.name().to_string(),
            opt(r.upper_bound),
            opt(r.lower_bound),
            opt(r.gap),
            opt(r.ratio),
            r.iterations.to_string(),
            format!("{:.3}", r.wall_ms),
            r.seed.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
