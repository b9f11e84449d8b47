//! `gcltlab` — command-line entry point for the experiment suite.
//!
//! Every command is a thin dispatcher: it parses a manifest (JSON file plus
//! flag/`key=value` overrides), calls the library, and emits rows in the
//! fixed CSV schema. Exit codes: 0 success, 1 selftest failure, 2 validation
//! error, 3 numerical-guard violation.

mod emit;
mod manifest;
mod payoffs;

use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;
use gcltlab_core::harness::{clt_converge, heavy_tail_experiment, lln_converge, ConvergenceRow};
use gcltlab_core::{
    acceptance, capacity_interval, cfl_steps, control_mc_lower_bound, solve_g_heat, tree_g_expect, GHeatParams,
    MeasureSet, ThetaInterval, TreeParams,
};
use manifest::Manifest;
use payoffs::{parse_control, parse_model, parse_path_payoff, parse_scalar_payoff};

#[derive(Debug)]
pub enum CliError {
    Core(gcltlab_core::Error),
    Validation(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Validation(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<gcltlab_core::Error> for CliError {
    fn from(e: gcltlab_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_guard() => 3,
            _ => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "gcltlab",
    about = "Sublinear-expectation experiments: variance bounds, adversarial DP limits, G-heat solvers, capacity brackets, control Monte Carlo",
    after_help = "Commands: variance, lln, clt, gheat, capacity, mc, example51, example52, example53, selftest.\n\
                  Remaining arguments are key=value parameter overrides; flags override manifest keys."
)]
struct Cli {
    /// Experiment to run.
    command: String,
    /// JSON manifest with command, parameters, seed and output path.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Seed for randomized commands (overrides the manifest).
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Variance interval `lo,hi`.
    #[arg(long)]
    theta: Option<String>,
    /// Payoff name (see README for the catalogue).
    #[arg(long)]
    payoff: Option<String>,
    /// Spatial grid step.
    #[arg(long)]
    h: Option<f64>,
    /// Time steps for the finite-difference solver.
    #[arg(long)]
    steps: Option<usize>,
    /// Interval left endpoint (capacity).
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Interval right endpoint (capacity).
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    /// Ramp half-width (capacity).
    #[arg(long)]
    eps: Option<f64>,
    /// Volatility control spec (mc).
    #[arg(long)]
    control: Option<String>,
    /// Number of Monte Carlo paths (mc).
    #[arg(long)]
    paths: Option<usize>,
    /// key=value parameter overrides.
    #[arg(value_name = "KEY=VALUE")]
    params: Vec<String>,
}

fn main() {
    if let Ok(raw) = std::env::var("GCLTLAB_THREADS") {
        if let Ok(n) = raw.parse::<usize>() {
            if n > 0 {
                gcltlab_core::configure_threads(n);
            }
        }
    }
    let cli = Cli::parse();
    let code = match resolve_manifest(&cli).and_then(|m| run(&m)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn resolve_manifest(cli: &Cli) -> Result<Manifest, CliError> {
    let mut m = match &cli.manifest {
        Some(path) => Manifest::load(path)?,
        None => Manifest {
            command: String::new(),
            parameters: Default::default(),
            seed: 0,
            output_path: None,
        },
    };
    m.command = cli.command.clone();
    if let Some(seed) = cli.seed {
        m.seed = seed;
    }
    if let Some(out) = &cli.out {
        m.output_path = Some(out.display().to_string());
    }
    if let Some(v) = &cli.theta {
        m.set("theta", v.clone());
    }
    if let Some(v) = &cli.payoff {
        m.set("payoff", v.clone());
    }
    if let Some(v) = cli.h {
        m.set("h", v.to_string());
    }
    if let Some(v) = cli.steps {
        m.set("steps", v.to_string());
    }
    if let Some(v) = cli.a {
        m.set("a", v.to_string());
    }
    if let Some(v) = cli.b {
        m.set("b", v.to_string());
    }
    if let Some(v) = cli.eps {
        m.set("eps", v.to_string());
    }
    if let Some(v) = &cli.control {
        m.set("control", v.clone());
    }
    if let Some(v) = cli.paths {
        m.set("paths", v.to_string());
    }
    for kv in &cli.params {
        match kv.split_once('=') {
            Some((key, value)) if !key.is_empty() => m.set(key.trim(), value.trim().to_string()),
            _ => return Err(CliError::Validation(format!("expected key=value, got `{kv}`"))),
        }
    }
    Ok(m)
}

fn run(m: &Manifest) -> Result<i32, CliError> {
    let rows = match m.command.as_str() {
        "variance" => cmd_variance(m)?,
        "lln" => cmd_lln(m)?,
        "clt" => cmd_clt(m)?,
        "gheat" => cmd_gheat(m)?,
        "capacity" => cmd_capacity(m)?,
        "mc" => cmd_mc(m)?,
        "example51" => cmd_example(m, "example51")?,
        "example52" => cmd_example(m, "example52")?,
        "example53" => cmd_example53(m)?,
        "selftest" => return cmd_selftest(),
        other => return Err(CliError::Validation(format!("unknown command `{other}`"))),
    };
    let out = m.output_path.as_ref().map(PathBuf::from);
    emit::emit_csv(&rows, out.as_deref())?;
    if let Some(path) = &out {
        m.save_beside(path)?;
        eprintln!("wrote {} rows to {}", rows.len(), path.display());
    }
    Ok(0)
}

/// Measure-set statistics. Always emits the mean interval (`mean_interval`:
/// lower mean in `dp_value`, upper mean in `limit_value`) and the variance
/// rows `variance_upper`/`variance_lower` (dual value vs simplex-grid
/// oracle, grid step echoed in `h`). With `payoff=<name>` adds an
/// `expectation` row (upper expectation in `dp_value`, lower in
/// `limit_value`); with `lambda=<x>` adds a `tail_deficiency` row.
fn cmd_variance(m: &Manifest) -> Result<Vec<ConvergenceRow>, CliError> {
    let set = parse_model(&m.get_str("set", "two_point_hull"))?;
    let grid_step = m.get_f64("grid_step", 0.01)?;
    let start = Instant::now();
    let vb = set.variance_bounds();
    let (oracle_max, oracle_min) = set.variance_oracle(grid_step)?;
    let ms = start.elapsed().as_millis() as u64;
    let interval = set.mean_interval();
    eprintln!(
        "mean interval [{}, {}], upper variance {} at mean {}, lower variance {}",
        interval.lower, interval.upper, vb.upper, vb.argmin_mean_upper, vb.lower
    );
    let mut mean_row = ConvergenceRow::new("mean_interval", 0, interval.lower, interval.upper, 0);
    mean_row.abs_error = interval.width();
    let mut rows = vec![
        mean_row,
        ConvergenceRow::new("variance_upper", 0, vb.upper, oracle_max, ms).with_h(grid_step),
        ConvergenceRow::new("variance_lower", 0, vb.lower, oracle_min, 0).with_h(grid_step),
    ];
    if let Some(name) = m.parameters.get("payoff") {
        let phi = parse_scalar_payoff(name)?;
        let upper = set.upper_expect(&phi);
        let lower = set.lower_expect(&phi);
        let mut row = ConvergenceRow::new("expectation", 0, upper, lower, 0);
        row.abs_error = upper - lower;
        rows.push(row);
    }
    if m.parameters.contains_key("lambda") {
        let lambda = m.get_f64("lambda", 0.0)?;
        let value = set.tail_deficiency(lambda)?;
        let mut row = ConvergenceRow::new("tail_deficiency", 0, value, 0.0, 0).with_h(lambda);
        row.abs_error = value;
        rows.push(row);
    }
    Ok(rows)
}

fn cmd_lln(m: &Manifest) -> Result<Vec<ConvergenceRow>, CliError> {
    let set = parse_model(&m.get_str("model", "fair_coin"))?;
    let payoff = parse_scalar_payoff(&m.get_str("payoff", "d_theta:0.5,0.5"))?;
    let lipschitz = m.get_f64("lipschitz", 1.0)?;
    let n_list = m.get_usize_list("nlist", &[10, 50, 200])?;
    Ok(lln_converge(&set, &payoff, lipschitz, &n_list)?)
}

fn cmd_clt(m: &Manifest) -> Result<Vec<ConvergenceRow>, CliError> {
    let set = parse_model(&m.get_str("model", "two_point_hull"))?;
    let payoff = parse_scalar_payoff(&m.get_str("payoff", "cap"))?;
    let n_list = m.get_usize_list("nlist", &[16, 64, 256])?;
    let resolution = m.get_usize("m", 50)?;
    let h = m.get_f64("h", 0.01)?;
    Ok(clt_converge(&set, &payoff, &n_list, resolution, h)?)
}

/// One limit-solver evaluation. With `method=both` the PDE value lands in
/// `dp_value`, the tree value in `limit_value`, and their discrepancy in
/// `abs_error`; single-solver runs leave the reference columns NaN.
fn cmd_gheat(m: &Manifest) -> Result<Vec<ConvergenceRow>, CliError> {
    let theta = ThetaInterval::parse(&m.get_str("theta", "0,0.25"))?;
    let payoff = parse_scalar_payoff(&m.get_str("payoff", "cap"))?;
    let defaults = GHeatParams::with_defaults(theta);
    let h = m.get_f64("h", defaults.h)?;
    let steps = m.get_usize("steps", cfl_steps(theta.sigma2_high(), h))?;
    let radius = m.get_f64("radius", defaults.x_radius)?;
    let params = GHeatParams {
        theta,
        x_radius: radius,
        h,
        time_steps: steps,
    };
    let method = m.get_str("method", "both");
    let start = Instant::now();
    let row = match method.as_str() {
        "pde" => {
            let value = solve_g_heat(&params, &payoff)?.value_at_origin;
            let ms = start.elapsed().as_millis() as u64;
            ConvergenceRow::new("gheat_pde", steps, value, f64::NAN, ms).with_h(h)
        }
        "tree" => {
            let tree_params = TreeParams {
                theta,
                steps: m.get_usize("tree_steps", 512)?,
                ..TreeParams::with_defaults(theta)
            };
            let value = tree_g_expect(&tree_params, &payoff)?;
            let ms = start.elapsed().as_millis() as u64;
            ConvergenceRow::new("gheat_tree", tree_params.steps, value, f64::NAN, ms).with_h(tree_params.h)
        }
        "both" => {
            let tolerance = m.get_f64("tolerance", 0.01)?;
            let pde = solve_g_heat(&params, &payoff)?.value_at_origin;
            let tree_params = TreeParams {
                theta,
                steps: m.get_usize("tree_steps", 512)?,
                ..TreeParams::with_defaults(theta)
            };
            let tree = tree_g_expect(&tree_params, &payoff)?;
            let discrepancy = (pde - tree).abs();
            if discrepancy > tolerance {
                return Err(gcltlab_core::Error::CrossOracle { pde, tree, tolerance }.into());
            }
            let ms = start.elapsed().as_millis() as u64;
            ConvergenceRow::new("gheat_both", steps, pde, tree, ms).with_h(h)
        }
        other => return Err(CliError::Validation(format!("unknown method `{other}`"))),
    };
    eprintln!("value {}", row.dp_value);
    Ok(vec![row])
}

/// Capacity bracket row: `dp_value` is the lower edge, `limit_value` the
/// upper edge, `abs_error` the bracket width.
fn cmd_capacity(m: &Manifest) -> Result<Vec<ConvergenceRow>, CliError> {
    let theta = ThetaInterval::parse(&m.get_str("theta", "0.25,0.25"))?;
    let a = m.get_f64("a", -1.0)?;
    let b = m.get_f64("b", 1.0)?;
    let eps = m.get_f64("eps", 0.01)?;
    let start = Instant::now();
    let bracket = capacity_interval(a, b, theta, eps)?;
    let ms = start.elapsed().as_millis() as u64;
    eprintln!(
        "capacity of [{a}, {b}] in [{}, {}], width {}",
        bracket.lower,
        bracket.upper,
        bracket.width()
    );
    let mut row = ConvergenceRow::new("capacity", 0, bracket.lower, bracket.upper, ms).with_h(eps);
    row.abs_error = bracket.width();
    Ok(vec![row])
}

/// Monte Carlo lower bound row: `dp_value` is the estimate; for payoffs of
/// the terminal value alone, `limit_value` carries the solver reference.
fn cmd_mc(m: &Manifest) -> Result<Vec<ConvergenceRow>, CliError> {
    let theta = ThetaInterval::parse(&m.get_str("theta", "0.25,1"))?;
    let (path_payoff, scalar) = parse_path_payoff(&m.get_str("payoff", "terminal_sq"))?;
    let control = parse_control(
        &m.get_str("control", "const:1"),
        theta.sigma2_low().sqrt(),
        theta.sigma2_high().sqrt(),
    )?;
    let paths = m.get_usize("paths", 10_000)?;
    let steps = m.get_usize("steps", 64)?;
    let start = Instant::now();
    let est = control_mc_lower_bound(&path_payoff, theta, &control, steps, paths, m.seed)?;
    let reference = match &scalar {
        Some(phi) => solve_g_heat(&GHeatParams::with_defaults(theta), phi)?.value_at_origin,
        None => f64::NAN,
    };
    let ms = start.elapsed().as_millis() as u64;
    eprintln!(
        "estimate {} +- {} ({} paths); lower-bound check value {}",
        est.estimate, est.std_error, est.paths, reference
    );
    Ok(vec![ConvergenceRow::new("mc", steps, est.estimate, reference, ms).with_k(paths)])
}

/// The bundled experiments: variance bounds plus a convergence table for the
/// named model family.
fn cmd_example(m: &Manifest, which: &str) -> Result<Vec<ConvergenceRow>, CliError> {
    let (set, default_res): (MeasureSet, usize) = match which {
        "example51" => (gcltlab_core::harness::fair_coin_singleton(), 1),
        _ => (gcltlab_core::harness::two_point_hull(), 50),
    };
    let payoff = parse_scalar_payoff(&m.get_str("payoff", "cap"))?;
    let n_list = m.get_usize_list("nlist", &[16, 64, 256])?;
    let resolution = m.get_usize("m", default_res)?;
    let h = m.get_f64("h", 0.01)?;
    let start = Instant::now();
    let vb = set.variance_bounds();
    let (oracle_max, oracle_min) = set.variance_oracle(0.01)?;
    let ms = start.elapsed().as_millis() as u64;
    let mut rows = vec![
        ConvergenceRow::new(&format!("{which}_variance_upper"), 0, vb.upper, oracle_max, ms),
        ConvergenceRow::new(&format!("{which}_variance_lower"), 0, vb.lower, oracle_min, 0),
    ];
    for mut row in clt_converge(&set, &payoff, &n_list, resolution, h)? {
        row.experiment = format!("{which}_clt");
        rows.push(row);
    }
    Ok(rows)
}

fn cmd_example53(m: &Manifest) -> Result<Vec<ConvergenceRow>, CliError> {
    let k_list = m.get_usize_list("k", &[10, 100, 1000])?;
    let n_list = m.get_usize_list("nlist", &[4, 16])?;
    let mut rows = Vec::new();
    for &k in &k_list {
        let report = heavy_tail_experiment(k, &n_list)?;
        eprintln!(
            "K = {k}: values {:?} vs classical {}",
            report.rows.iter().map(|r| r.dp_value).collect::<Vec<_>>(),
            report.classical_value
        );
        rows.extend(report.rows);
    }
    Ok(rows)
}

/// Runs the acceptance suite, printing one line per criterion; exit 0 only
/// when everything passes.
fn cmd_selftest() -> Result<i32, CliError> {
    let outcomes = acceptance::run_all();
    let mut all_passed = true;
    for o in &outcomes {
        println!("{}", o.line());
        all_passed &= o.passed;
    }
    println!(
        "selftest: {}/{} criteria passed",
        outcomes.iter().filter(|o| o.passed).count(),
        outcomes.len()
    );
    Ok(if all_passed { 0 } else { 1 })
}
