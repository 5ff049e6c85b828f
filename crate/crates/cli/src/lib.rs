//! Command-line front end: evaluation, sweeps, simulation, exact enumeration,
//! contour extraction and the verification suite, all emitting CSV.

use std::io::{self, Write};
use std::path::PathBuf;

use ab_rsa::analytic::{self, closed_form_rho_a, density_triple, ModelParams};
use ab_rsa::lattice::Boundary;
use ab_rsa::oracle::{self, OracleProblem};
use ab_rsa::rng::DEFAULT_SEED;
use ab_rsa::simulator::{self, LatticeConfig};
use ab_rsa::verify::{self, ClosedForm, Tier};
use ab_rsa::{events, DensityTriple};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

pub mod format;

use format::{Field, Table};

pub const DEFAULT_LEVELS: [f64; 5] = [0.05, 0.1, 0.2, 0.4, 0.8];
pub const LEFT_PANEL_ALPHAS: [f64; 4] = [0.2, 0.5, 0.75, 0.9];
pub const RIGHT_PANEL_TIMES: [f64; 3] = [0.2, 0.5, 1.0];

#[derive(Debug, Parser)]
#[command(
    name = "ab-rsa",
    version,
    about = "AB random sequential adsorption with one attempt per site"
)]
pub struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output file (default: standard output).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Densities at a single (t, alpha).
    Eval(EvalArgs),
    /// Densities over a grid of (t, alpha).
    Sweep(SweepArgs),
    /// Lattice-averaged densities from direct simulation.
    Simulate(SimulateArgs),
    /// Exact occupation probabilities on a small lattice.
    Oracle(OracleArgs),
    /// Level sets rho_A(t; alpha) = lambda.
    Contour(ContourArgs),
    /// Cross-engine verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    #[value(name = "closed_form")]
    ClosedForm,
    #[value(name = "event_sum")]
    EventSum,
    #[value(name = "integral")]
    Integral,
    #[value(name = "simulate")]
    Simulate,
}

impl Engine {
    fn name(self) -> &'static str {
        match self {
            Engine::ClosedForm => "closed_form",
            Engine::EventSum => "event_sum",
            Engine::Integral => "integral",
            Engine::Simulate => "simulate",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct LatticeArgs {
    /// Lattice size.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,

    #[arg(long, default_value_t = 8)]
    pub replicas: u64,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// periodic or free.
    #[arg(long, default_value = "periodic", value_parser = clap::value_parser!(Boundary))]
    pub boundary: Boundary,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value = "closed_form")]
    pub engine: Engine,

    /// Truncation index for the event sum.
    #[arg(long, default_value_t = 25)]
    pub max_index: usize,

    /// Absolute tolerance for the integral.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,

    #[command(flatten)]
    pub lattice: LatticeArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub t: f64,

    #[arg(long)]
    pub alpha: f64,

    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Panel {
    /// Fixed alphas, t across [0, 1].
    Left,
    /// Fixed times, alpha across [0, 1].
    Right,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Default grids: left = alpha in {0.2, 0.5, 0.75, 0.9} by uniform t;
    /// right = t in {0.2, 0.5, 1} by uniform alpha.
    #[arg(long, value_enum, default_value = "left")]
    pub panel: Panel,

    /// Comma-separated alpha values (overrides the panel default).
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,

    /// Comma-separated t values (overrides the panel default).
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,

    /// Points in the uniform grid over [0, 1].
    #[arg(long, default_value_t = 201)]
    pub points: usize,

    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub alpha: f64,

    /// Comma-separated, strictly ascending sample times.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub times: Vec<f64>,

    #[command(flatten)]
    pub lattice: LatticeArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Lattice size (at most 12).
    #[arg(long, required_unless_present = "window", conflicts_with = "window")]
    pub n: Option<usize>,

    /// Centred free window of 2 h + 1 sites, compared with the bulk law.
    #[arg(long, value_name = "H")]
    pub window: Option<usize>,

    #[arg(long)]
    pub alpha: f64,

    #[arg(long)]
    pub t: f64,

    #[arg(long, default_value_t = 0, conflicts_with = "window")]
    pub target: usize,

    /// Ring topology (the default is an open path).
    #[arg(long, conflicts_with_all = ["free", "window"])]
    pub periodic: bool,

    /// Open path (the default).
    #[arg(long)]
    pub free: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ContourArgs {
    /// Comma-separated, strictly ascending levels in (0, 1).
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LEVELS)]
    pub levels: Vec<f64>,

    /// Alpha samples per curve, alpha = i / (resolution - 1).
    #[arg(long, default_value_t = 201)]
    pub alpha_resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TierArg {
    Fast,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "fast")]
    pub tier: TierArg,

    /// Scales the closed form by (1 + value); for testing the suite itself.
    #[arg(long, hide = true)]
    pub perturb: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Engine(#[from] ab_rsa::Error),

    #[error("{0}")]
    Usage(String),

    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },

    #[error("{failed} verification check(s) failed")]
    Verification { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Engine(e) if e.is_invalid_input() => 2,
            CliError::Usage(_) => 2,
            CliError::Engine(_) | CliError::Io { .. } => 3,
            CliError::Verification { .. } => 4,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}

pub fn run(cli: Cli) -> Result<()> {
    let pool = match cli.threads {
        Some(0) => return usage("--threads must be positive"),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?,
        None => rayon::ThreadPoolBuilder::new()
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?,
    };
    let (csv, outcome) = pool.install(|| execute(&cli.command))?;
    emit(cli.output.as_ref(), &csv)?;
    outcome
}

/// Produces the CSV text; the inner result carries a verification failure,
/// which still has a report to write.
fn execute(command: &Command) -> Result<(String, Result<()>)> {
    let csv = match command {
        Command::Eval(a) => cmd_eval(a)?,
        Command::Sweep(a) => cmd_sweep(a)?,
        Command::Simulate(a) => cmd_simulate(a)?,
        Command::Oracle(a) => cmd_oracle(a)?,
        Command::Contour(a) => cmd_contour(a)?,
        Command::Verify(a) => return cmd_verify(a),
    };
    Ok((csv, Ok(())))
}

fn emit(path: Option<&PathBuf>, csv: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, csv).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            let mut out = io::stdout().lock();
            match out.write_all(csv.as_bytes()).and_then(|_| out.flush()) {
                // The reader went away (e.g. `| head`); nothing left to report.
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                }),
            }
        }
    }
}

const SWEEP_HEADER: [&str; 8] = [
    "t", "alpha", "rho_A", "rho_B", "rho_X", "engine", "diag1", "diag2",
];

/// One sweep record. The diagnostics depend on the engine: tail bound and
/// truncation index (event_sum), error estimate and evaluation count
/// (integral), standard error of rho_A and replica count (simulate).
struct Record {
    t: f64,
    alpha: f64,
    triple: DensityTriple,
    engine: Engine,
    diag1: Option<f64>,
    diag2: Option<u64>,
}

impl Record {
    fn write(&self, table: &mut Table) {
        table.row(&[
            self.t.into(),
            self.alpha.into(),
            self.triple.rho_a.into(),
            self.triple.rho_b.into(),
            self.triple.rho_x.into(),
            self.engine.name().into(),
            self.diag1.into(),
            self.diag2.map_or(Field::Empty, Field::Int),
        ]);
    }
}

fn triple(rho_a: f64, rho_b: f64) -> DensityTriple {
    DensityTriple {
        rho_a,
        rho_b,
        rho_x: 1.0 - rho_a - rho_b,
    }
}

fn evaluate(engine: &EngineArgs, alpha: f64, t: f64) -> Result<Record> {
    let params = ModelParams::new(alpha, t)?;
    let (triple, diag1, diag2) = match engine.engine {
        Engine::ClosedForm => (density_triple(&params)?, None, None),
        Engine::EventSum => {
            let a = events::rho_a_event_sum(&params, engine.max_index)?;
            let b = events::rho_a_event_sum(&params.swapped(), engine.max_index)?;
            (
                triple(a.value, b.value),
                Some(a.tail_bound.max(b.tail_bound)),
                Some(engine.max_index as u64),
            )
        }
        Engine::Integral => {
            let a = analytic::integral_rho_a(&params, engine.tol)?;
            let b = analytic::integral_rho_a(&params.swapped(), engine.tol)?;
            (
                triple(a.value, b.value),
                Some(a.error_estimate.max(b.error_estimate)),
                Some((a.evaluations + b.evaluations) as u64),
            )
        }
        Engine::Simulate => return Ok(simulate_records(engine, alpha, &[t])?.remove(0)),
    };
    Ok(Record {
        t,
        alpha,
        triple,
        engine: engine.engine,
        diag1,
        diag2,
    })
}

fn lattice_config(args: &LatticeArgs, alpha: f64, sample_times: Vec<f64>) -> LatticeConfig {
    LatticeConfig {
        n_sites: args.n,
        boundary: args.boundary,
        alpha,
        sample_times,
        master_seed: args.seed,
        replicas: args.replicas,
    }
}

/// One simulation per alpha, sampled at every requested time.
fn simulate_records(engine: &EngineArgs, alpha: f64, times: &[f64]) -> Result<Vec<Record>> {
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let estimates =
        simulator::estimate_density(&lattice_config(&engine.lattice, alpha, sorted.clone()))?;
    times
        .iter()
        .map(|&t| {
            let e = &estimates[sorted.partition_point(|&s| s < t)];
            Ok(Record {
                t,
                alpha,
                triple: e.mean,
                engine: Engine::Simulate,
                diag1: Some(e.std_error.rho_a),
                diag2: Some(e.replicas),
            })
        })
        .collect()
}

pub fn cmd_eval(args: &EvalArgs) -> Result<String> {
    let record = evaluate(&args.engine, args.alpha, args.t)?;
    let mut table = Table::new(&SWEEP_HEADER);
    record.write(&mut table);
    Ok(table.into_string())
}

fn uniform_grid(points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return usage("--points must be at least 2");
    }
    Ok((0..points)
        .map(|i| i as f64 / (points - 1) as f64)
        .collect())
}

fn check_grid(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return usage(format!("{name} grid is empty"));
    }
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return usage(format!("{name} = {v} is outside [0, 1]"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return usage(format!("duplicate {name} value {}", w[0]));
    }
    Ok(())
}

/// Rows are grouped by curve: alpha-major for the left panel, t-major for
/// the right.
pub fn cmd_sweep(args: &SweepArgs) -> Result<String> {
    let alphas = match (&args.alpha, args.panel) {
        (Some(a), _) => a.clone(),
        (None, Panel::Left) => LEFT_PANEL_ALPHAS.to_vec(),
        (None, Panel::Right) => uniform_grid(args.points)?,
    };
    let times = match (&args.t, args.panel) {
        (Some(t), _) => t.clone(),
        (None, Panel::Left) => uniform_grid(args.points)?,
        (None, Panel::Right) => RIGHT_PANEL_TIMES.to_vec(),
    };
    check_grid("alpha", &alphas)?;
    check_grid("t", &times)?;

    let mut records: Vec<Record> = if args.engine.engine == Engine::Simulate {
        let per_alpha: Vec<Vec<Record>> = alphas
            .iter()
            .map(|&a| simulate_records(&args.engine, a, &times))
            .collect::<Result<_>>()?;
        per_alpha.into_iter().flatten().collect()
    } else {
        let points: Vec<(f64, f64)> = alphas
            .iter()
            .flat_map(|&a| times.iter().map(move |&t| (a, t)))
            .collect();
        points
            .par_iter()
            .map(|&(a, t)| evaluate(&args.engine, a, t))
            .collect::<Result<_>>()?
    };
    if args.panel == Panel::Right {
        // Stable sort keeps alpha order within each t.
        let position = |t: f64| times.iter().position(|&s| s == t).expect("t from the grid");
        records.sort_by_key(|r| position(r.t));
    }
    let mut table = Table::new(&SWEEP_HEADER);
    for r in &records {
        r.write(&mut table);
    }
    Ok(table.into_string())
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<String> {
    let config = lattice_config(&args.lattice, args.alpha, args.times.clone());
    let estimates = simulator::estimate_density(&config)?;
    let mut table = Table::new(&[
        "time",
        "n_sites",
        "replicas",
        "rho_A_mean",
        "rho_A_stderr",
        "rho_B_mean",
        "rho_B_stderr",
        "rho_X_mean",
        "rho_X_stderr",
        "rho_A_closed",
        "z_A",
    ]);
    for e in &estimates {
        let closed = closed_form_rho_a(&ModelParams::new(args.alpha, e.time)?);
        let diff = e.mean.rho_a - closed;
        // Empty when the standard error vanishes and the z-score is undefined.
        let z = if e.std_error.rho_a > 0.0 {
            Some(diff / e.std_error.rho_a)
        } else if diff == 0.0 {
            Some(0.0)
        } else {
            None
        };
        table.row(&[
            e.time.into(),
            Field::Int(e.n_sites as u64),
            Field::Int(e.replicas),
            e.mean.rho_a.into(),
            e.std_error.rho_a.into(),
            e.mean.rho_b.into(),
            e.std_error.rho_b.into(),
            e.mean.rho_x.into(),
            e.std_error.rho_x.into(),
            closed.into(),
            z.into(),
        ]);
    }
    Ok(table.into_string())
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<String> {
    let mut table = Table::new(&[
        "n_sites",
        "boundary",
        "target",
        "alpha",
        "t",
        "p_A",
        "p_B",
        "p_X",
        "rho_A_closed",
        "gap",
        "tail_bound",
    ]);
    let (n, boundary, target, window) = match (args.window, args.n) {
        (Some(h), _) => {
            let w = oracle::window_density(args.alpha, args.t, h)?;
            (2 * h + 1, Boundary::Free, h, Some(w))
        }
        (None, Some(n)) => {
            let boundary = if args.periodic {
                Boundary::Periodic
            } else {
                Boundary::Free
            };
            (n, boundary, args.target, None)
        }
        (None, None) => return usage("either --n or --window is required"),
    };
    let p = oracle::exact_occupation(&OracleProblem {
        n_sites: n,
        boundary,
        alpha: args.alpha,
        t: args.t,
        target_site: target,
    })?;
    table.row(&[
        Field::Int(n as u64),
        boundary.to_string().as_str().into(),
        Field::Int(target as u64),
        args.alpha.into(),
        args.t.into(),
        p.rho_a.into(),
        p.rho_b.into(),
        p.rho_x.into(),
        window.map(|w| w.closed_form).into(),
        window.map(|w| w.gap()).into(),
        window.map(|w| w.truncation_note).into(),
    ]);
    Ok(table.into_string())
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return usage("no contour levels given");
    }
    if let Some(l) = levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return usage(format!("level {l} is outside (0, 1)"));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return usage("levels must be strictly ascending");
    }
    Ok(())
}

pub fn cmd_contour(args: &ContourArgs) -> Result<String> {
    check_levels(&args.levels)?;
    let alphas = uniform_grid(args.alpha_resolution)
        .map_err(|_| CliError::Usage("--alpha-resolution must be at least 2".into()))?;
    let points: Vec<(f64, f64)> = args
        .levels
        .iter()
        .flat_map(|&l| alphas.iter().map(move |&a| (l, a)))
        .collect();
    let solved: Vec<Option<f64>> = points
        .par_iter()
        .map(|&(lambda, alpha)| {
            if alpha == 0.0 {
                // rho_A vanishes identically.
                Ok(None)
            } else {
                analytic::contour_solve_t(alpha, lambda)
            }
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut table = Table::new(&["lambda", "alpha", "t", "status"]);
    for (&(lambda, alpha), t) in points.iter().zip(&solved) {
        table.row(&[
            lambda.into(),
            alpha.into(),
            (*t).into(),
            if t.is_some() { "ok" } else { "no_solution" }.into(),
        ]);
    }
    Ok(table.into_string())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(String, Result<()>)> {
    let tier = match args.tier {
        TierArg::Fast => Tier::Fast,
        TierArg::Full => Tier::Full,
    };
    let report = match args.perturb {
        Some(eps) => {
            let law = move |p: &ModelParams| closed_form_rho_a(p) * (1.0 + eps);
            verify::run(tier, &law)?
        }
        None => verify::run(tier, &ClosedForm)?,
    };
    let mut table = Table::new(&["check", "measured", "tolerance", "status"]);
    for c in &report.checks {
        table.row(&[
            c.name.into(),
            c.measured.into(),
            c.tolerance.into(),
            if c.passed { "pass" } else { "fail" }.into(),
        ]);
    }
    let failed = report.failures().count();
    let outcome = if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Verification { failed })
    };
    Ok((table.into_string(), outcome))
}
