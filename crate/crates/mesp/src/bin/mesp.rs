use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mesp::error::Error;
use mesp::experiment::{self, ConstraintSource, ExperimentConfig};
use mesp::{gen, io};
use mesp_core::bqp::{self, BqpPoint};
use mesp_core::fixing::{iterate_fixing, FixOptions, FixResult, ScalingMode};
use mesp_core::heuristics::{greedy_construct, local_search, Incumbent};
use mesp_core::oracle::solve_exact_with_budget;
use mesp_core::relax::Method;
use mesp_core::scaling::optimize_o_scaling_point;
use mesp_core::{tol, Instance, ScalingVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "mesp", version, about = "Scaled relaxation bounds for constrained maximum-entropy sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a certified upper bound.
    Bound(BoundArgs),
    /// Solve exactly by enumeration (small instances only).
    Exact {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Largest number of subsets to enumerate.
        #[arg(long, default_value_t = mesp_core::oracle::DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Greedy construction followed by swap local search.
    Heuristic {
        #[command(flatten)]
        inst: InstanceArgs,
    },
    /// Fix variables by probing against a heuristic lower bound.
    Fix(FixArgs),
    /// Run the benchmark grid and write CSV.
    Experiment(ExperimentArgs),
    /// Evaluate the BQP objective at a point or at a set's lift.
    BqpEval(BqpArgs),
    /// Write a random covariance `G Gᵀ + δI`.
    Generate(GenerateArgs),
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Covariance matrix file.
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    s: usize,
    /// Side constraints file.
    #[arg(long)]
    constraints: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    None,
    O,
    G,
}

impl From<Mode> for ScalingMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::None => ScalingMode::None,
            Mode::O => ScalingMode::O,
            Mode::G => ScalingMode::G,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum OutFormat {
    Text,
    Csv,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    /// linx, ddfact or ddfact-comp.
    #[arg(long)]
    method: String,
    #[arg(long, value_enum, default_value = "none")]
    scaling: Mode,
    /// BFGS step budget for g-scaling.
    #[arg(long, default_value_t = 50)]
    scaling_steps: usize,
    /// Frank-Wolfe gap tolerance.
    #[arg(long, default_value_t = tol::FW_GAP)]
    tol: f64,
    #[arg(long, value_enum, default_value = "text")]
    out: OutFormat,
    /// Accepted for symmetry with the other commands; bounds are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FixArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// A single cardinality; use --s-range for a sweep.
    #[arg(long, conflicts_with = "s_range", required_unless_present = "s_range")]
    s: Option<usize>,
    /// Inclusive range `LO:HI`.
    #[arg(long)]
    s_range: Option<String>,
    #[arg(long, conflicts_with = "gen_constraints")]
    constraints: Option<PathBuf>,
    /// Generate this many side constraints per cardinality.
    #[arg(long)]
    gen_constraints: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "g")]
    mode: Mode,
    /// Maximum number of fixing rounds.
    #[arg(long, default_value_t = 20)]
    rounds: usize,
    /// BFGS steps per g-scaling.
    #[arg(long, default_value_t = 10)]
    scaling_steps: usize,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, conflicts_with = "gen_constraints")]
    constraints: Option<PathBuf>,
    #[arg(long)]
    gen_constraints: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Inclusive range `LO:HI`.
    #[arg(long)]
    s_range: String,
    /// Comma-separated list of linx, ddfact, ddfact-comp.
    #[arg(long, default_value = "linx,ddfact,ddfact-comp")]
    methods: String,
    /// Comma-separated list of none, o, g.
    #[arg(long, default_value = "none,o,g")]
    scalings: String,
    #[arg(long, default_value_t = 50)]
    scaling_steps: usize,
    #[arg(long, default_value_t = tol::FW_GAP)]
    tol: f64,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BqpArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Point file: `n`, then `x`, then `X`.
    #[arg(long, conflicts_with = "set", required_unless_present = "set")]
    point: Option<PathBuf>,
    /// Comma-separated 1-based indices; evaluates at the lifted set.
    #[arg(long)]
    set: Option<String>,
    /// Uniform scaling; `opt` runs Newton on log γ.
    #[arg(long, conflicts_with = "scaling_file", default_value = "1")]
    gamma: String,
    /// File with one positive scaling entry per variable.
    #[arg(long)]
    scaling_file: Option<PathBuf>,
    /// Cardinality used for the membership check.
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    constraints: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
    /// Also write this many side constraints for cardinality --s.
    #[arg(long, requires_all = ["s", "constraints_output"])]
    m: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    constraints_output: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Bound(a) => cmd_bound(a),
        Command::Exact { inst, budget } => cmd_exact(&inst, budget),
        Command::Heuristic { inst } => cmd_heuristic(&inst),
        Command::Fix(a) => cmd_fix(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::BqpEval(a) => cmd_bqp_eval(a),
        Command::Generate(a) => cmd_generate(a),
    }
}

fn load(a: &InstanceArgs) -> Result<Instance, Error> {
    io::load_instance(&a.matrix, a.s, a.constraints.as_deref())
}

fn parse_method(name: &str) -> Result<Method, Error> {
    if name == "bqp" {
        return Err(Error::Usage("BQP solve unsupported; use bqp-eval".into()));
    }
    name.parse().map_err(|e: mesp_core::Error| Error::Usage(e.to_string()))
}

fn parse_list<T>(list: &str, parse: impl Fn(&str) -> Result<T, Error>) -> Result<Vec<T>, Error> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(parse).collect()
}

fn parse_range(text: &str) -> Result<Vec<usize>, Error> {
    let bad = || Error::Usage(format!("expected LO:HI, found '{text}'"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

/// 1-based, comma-separated.
fn show_set(set: &[usize]) -> String {
    set.iter().map(|j| (j + 1).to_string()).collect::<Vec<_>>().join(",")
}

fn show_vec(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.10}")).collect::<Vec<_>>().join(" ")
}

fn cmd_bound(a: BoundArgs) -> Result<(), Error> {
    let method = parse_method(&a.method)?;
    let inst = load(&a.inst)?;
    let start = Instant::now();
    let b = experiment::scaled_bound(&inst, method, a.scaling.into(), a.scaling_steps, a.tol, None)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let r = &b.report;
    let mode = ScalingMode::from(a.scaling).name();
    let mut out = std::io::stdout().lock();
    let res = match a.out {
        OutFormat::Csv => writeln!(out, "method,scaling,ub,value,gap,iters,converged,wall_ms").and_then(|_| {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{:.3}",
                method, mode, r.upper_bound, r.value, r.gap, b.iterations, r.converged, wall_ms
            )
        }),
        OutFormat::Text => writeln!(
            out,
            "method: {method}\nscaling: {mode}\nupper_bound: {}\nvalue: {}\ngap: {:e}\niterations: {}\nconverged: {}\nwall_ms: {wall_ms:.3}\ngamma: {}\nx: {}",
            r.upper_bound,
            r.value,
            r.gap,
            b.iterations,
            r.converged,
            show_vec(r.scaling.gamma()),
            show_vec(&r.x)
        ),
    };
    res.map_err(|source| Error::Io { path: "<stdout>".into(), source })
}

fn cmd_exact(a: &InstanceArgs, budget: u128) -> Result<(), Error> {
    let inst = load(a)?;
    let r = solve_exact_with_budget(&inst, budget)?;
    println!("z: {}", r.z);
    println!("feasible_sets: {}", r.count_feasible);
    for set in &r.optima {
        println!("optimum: {}", show_set(set));
    }
    Ok(())
}

fn cmd_heuristic(a: &InstanceArgs) -> Result<(), Error> {
    let inst = load(a)?;
    let greedy = greedy_construct(&inst)?;
    let best = local_search(&inst, &greedy);
    println!("greedy: {} [{}]", greedy.value, show_set(&greedy.set));
    println!("local_search: {} [{}]", best.value, show_set(&best.set));
    Ok(())
}

fn incumbent(inst: &Instance) -> Result<Incumbent, Error> {
    Ok(local_search(inst, &greedy_construct(inst)?))
}

fn print_fix(s: usize, r: &FixResult) {
    println!("s: {s}");
    println!("  lb: {}", r.lb);
    println!("  fix0: [{}]", show_set(&r.fix0));
    println!("  fix1: [{}]", show_set(&r.fix1));
    println!("  rounds: {}  solves: {}  stop: {:?}", r.rounds, r.solves, r.stop);
    if let Some(v) = r.decided_value {
        println!("  decided: {v}");
    }
    for p in &r.probes {
        println!(
            "  probe {} -> {:?} by {} ({:?}, round {}): bound {} margin {:e}",
            p.index + 1,
            p.fixed_to,
            p.method,
            p.evidence,
            p.round,
            p.probe_bound,
            p.margin
        );
    }
}

fn cmd_fix(a: FixArgs) -> Result<(), Error> {
    let c = io::read_matrix(&a.matrix)?;
    let cons = a.constraints.as_deref().map(io::read_constraints).transpose()?;
    let s_values = match (&a.s_range, a.s) {
        (Some(r), _) => parse_range(r)?,
        (None, Some(s)) => vec![s],
        (None, None) => return Err(Error::Usage("either --s or --s-range is required".into())),
    };
    let mut opts = FixOptions::with_mode(a.mode.into());
    opts.max_rounds = a.rounds;
    opts.bfgs_steps = a.scaling_steps;
    let sweep = a.s_range.is_some();

    let (mut solved, mut with_fix, mut vars) = (0usize, 0usize, 0usize);
    for s in s_values {
        let outcome = (|| {
            let mut inst = Instance::new(c.clone(), s, cons.clone())?;
            if let Some(m) = a.gen_constraints {
                let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
                rng.set_stream(s as u64);
                inst = gen::gen_side_constraints(&inst, m, &mut rng)?;
            }
            let inc = incumbent(&inst)?;
            Ok::<_, Error>(iterate_fixing(&inst, inc.value, Some(&inc), &opts)?)
        })();
        match outcome {
            Ok(r) => {
                print_fix(s, &r);
                solved += 1;
                with_fix += usize::from(r.fixed_count() > 0);
                vars += r.fixed_count();
            }
            Err(e) if sweep => println!("s: {s}\n  error: {e}"),
            Err(e) => return Err(e),
        }
    }
    if sweep {
        println!("instances_solved: {solved}");
        println!("instances_with_fix: {with_fix}");
        println!("variables_fixed: {vars}");
    }
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs) -> Result<(), Error> {
    let covariance = io::read_matrix(&a.matrix)?;
    let constraints = match (&a.constraints, a.gen_constraints) {
        (Some(p), _) => ConstraintSource::Given(io::read_constraints(p)?),
        (None, Some(m)) => ConstraintSource::Generate(m),
        (None, None) => ConstraintSource::None,
    };
    let cfg = ExperimentConfig {
        covariance,
        constraints,
        s_values: parse_range(&a.s_range)?,
        methods: parse_list(&a.methods, parse_method)?,
        scalings: parse_list(&a.scalings, |s| s.parse().map_err(|e: mesp_core::Error| Error::Usage(e.to_string())))?,
        scaling_steps: a.scaling_steps,
        tol: a.tol,
        seed: a.seed,
    };
    let rows = experiment::run(&cfg);
    let path = a.output.clone().unwrap_or_else(|| "<stdout>".into());
    let res = match &a.output {
        Some(p) => std::fs::File::create(p)
            .map_err(|source| Error::Io { path: p.clone(), source })
            .and_then(|f| experiment::write_csv(&rows, f).map_err(|e| csv_error(&path, e))),
        None => experiment::write_csv(&rows, std::io::stdout().lock()).map_err(|e| csv_error(&path, e)),
    };
    res
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source: std::io::Error::other(e) }
}

fn cmd_bqp_eval(a: BqpArgs) -> Result<(), Error> {
    let c = io::read_matrix(&a.matrix)?;
    let n = c.order();
    let point = match (&a.point, &a.set) {
        (Some(p), _) => io::read_point(p)?,
        (None, Some(list)) => {
            let set = parse_list(list, |t| match t.parse::<usize>() {
                Ok(j) if (1..=n).contains(&j) => Ok(j - 1),
                _ => Err(Error::Usage(format!("bad index '{t}' (expected 1..{n})"))),
            })?;
            BqpPoint::lift_set(n, &set)
        }
        (None, None) => return Err(Error::Usage("either --point or --set is required".into())),
    };
    if point.x.len() != n {
        return Err(Error::Usage(format!("point has dimension {}, matrix has order {n}", point.x.len())));
    }
    if let Some(s) = a.s {
        let cons = a.constraints.as_deref().map(io::read_constraints).transpose()?;
        for v in bqp::check_membership(&point, s, cons.as_ref()) {
            println!("violation: {v:?}");
        }
    }
    let scaling = match (&a.scaling_file, a.gamma.as_str()) {
        (Some(p), _) => ScalingVector::from_gamma(io::read_vector(p)?)?,
        (None, "opt") => {
            let o = optimize_o_scaling_point(&point, &c, 1.0)?;
            println!("gamma_opt: {}  derivative: {:e}  iterations: {}", o.gamma, o.derivative, o.iterations);
            ScalingVector::uniform(n, o.gamma)?
        }
        (None, g) => {
            let g: f64 = g.parse().map_err(|_| Error::Usage(format!("bad gamma '{g}'")))?;
            ScalingVector::uniform(n, g)?
        }
    };
    println!("value: {}", bqp::value(&point, &scaling, &c));
    match bqp::grad_log_scaling(&point, &scaling, &c) {
        Some(g) => println!("grad_log_scaling: {}", show_vec(&g)),
        None => println!("grad_log_scaling: undefined (singular matrix)"),
    }
    Ok(())
}

fn cmd_generate(a: GenerateArgs) -> Result<(), Error> {
    if a.n < 2 || !(a.delta >= 0.0) {
        return Err(Error::Usage("need n >= 2 and delta >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let c = gen::random_covariance(&mut rng, a.n, a.delta);
    io::write_file(&a.output, &io::format_matrix(&c))?;
    if let (Some(m), Some(s), Some(path)) = (a.m, a.s, &a.constraints_output) {
        let inst = gen::gen_side_constraints(&Instance::new(c, s, None)?, m, &mut rng)?;
        if let Some(cons) = inst.constraints() {
            io::write_file(path, &io::format_constraints(cons))?;
        }
    }
    Ok(())
}
