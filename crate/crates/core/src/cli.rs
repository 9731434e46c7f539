//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 non-convergence or no real
//! solution, 3 trajectory aborted.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{self, format_sci, BenchConfig, Model, DEFAULT_BASE_SEED, DEFAULT_LAMBDA};
use crate::error::Error;
use crate::integrator::{self, IntegratorConfig, TrajectoryDiagnostics};
use crate::riccati::{congruence, solve_su2_branches, Su2Vector};
use crate::solvers::{
    residual, solve, NewtonVariant, SolverConfig, SolverKind, DEFAULT_MAX_ITER, DEFAULT_TOL,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NO_CONVERGENCE: i32 = 2;
pub const EXIT_ABORTED: i32 = 3;

pub const EVOLVE_HEADER: &str = "step,time,hamiltonian,spectral_drift,solver_iters";

#[derive(Debug, Parser)]
#[command(name = "isocubic", version, about = "Cubic matrix equation solvers and isospectral integrator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one cubic equation with a random right-hand side.
    Solve(SolveArgs),
    /// Sweep sizes and solvers, writing mean iteration counts as CSV.
    Bench(BenchArgs),
    /// Integrate a trajectory and write conservation diagnostics as CSV.
    Evolve(EvolveArgs),
    /// Show the two solutions of an su(2) Riccati equation.
    DemoRiccati(RiccatiArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_parser = parse_model)]
    pub model: Model,
    /// Alfvén scale parameter.
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
}

#[derive(Debug, Args)]
pub struct TolArgs {
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long, default_value = "v2", value_parser = parse_variant)]
    pub newton_variant: NewtonVariant,
}

impl TolArgs {
    fn config(&self, h: f64) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            newton_variant: self.newton_variant,
            ..SolverConfig::with_h(h)
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Matrix size, or number of particles for the chain.
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub h: f64,
    #[arg(long, value_parser = parse_solver)]
    pub solver: SolverKind,
    #[arg(long, default_value_t = DEFAULT_BASE_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub tol: TolArgs,
    /// Also write a one-row CSV summary.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub h: f64,
    /// Comma-separated solver list.
    #[arg(long, value_delimiter = ',', value_parser = parse_solver,
          default_value = "explicit,linear,newton")]
    pub solvers: Vec<SolverKind>,
    #[arg(long, default_value_t = 1025)]
    pub max_n: usize,
    /// Number of random right-hand sides per cell.
    #[arg(long, default_value_t = bench::DEFAULT_NUM_SEEDS)]
    pub seeds: usize,
    #[arg(long, default_value_t = DEFAULT_BASE_SEED)]
    pub base_seed: u64,
    #[command(flatten)]
    pub tol: TolArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub h: f64,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value = "linear", value_parser = parse_solver)]
    pub solver: SolverKind,
    #[arg(long, default_value_t = DEFAULT_BASE_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RiccatiArgs {
    /// Draw x and a generating P from this seed.
    #[arg(long, conflicts_with_all = ["x", "y"])]
    pub seed: Option<u64>,
    /// x as "x1,x2,x3".
    #[arg(long, value_parser = parse_vector, requires = "y")]
    pub x: Option<Su2Vector>,
    #[arg(long, value_parser = parse_vector, requires = "x")]
    pub y: Option<Su2Vector>,
    #[arg(long, default_value_t = 0.5)]
    pub h: f64,
}

fn parse_model(s: &str) -> Result<Model, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_variant(s: &str) -> Result<NewtonVariant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_vector(s: &str) -> Result<Su2Vector, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        &[a, b, c] => Ok(Su2Vector::new(a, b, c)),
        _ => Err(format!("expected three comma-separated numbers, got {}", parts.len())),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Solve(a) => cmd_solve(&a, &mut stdout),
        Command::Bench(a) => cmd_bench(&a),
        Command::Evolve(a) => cmd_evolve(&a),
        Command::DemoRiccati(a) => cmd_demo_riccati(&a, &mut stdout),
    }
}

fn usage(err: impl std::fmt::Display) -> i32 {
    eprintln!("error: {err}");
    EXIT_USAGE
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new)
}

pub fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> i32 {
    let op = match a.model.model.operator(a.n, a.model.lambda) {
        Ok(op) => op,
        Err(e) => return usage(e),
    };
    let cfg = a.tol.config(a.h);
    if let Err(e) = cfg.validate() {
        return usage(e);
    }
    let result = a
        .model
        .model
        .initial_value(op.as_ref(), a.seed)
        .and_then(|y| {
            let (x, report) = solve(a.solver, &y, op.as_ref(), &cfg)?;
            let cert = residual(&x, &y, op.as_ref(), a.h)?.norm();
            Ok((report, cert))
        });
    let (report, cert) = match result {
        Ok(r) => r,
        Err(e) => return usage(e),
    };
    let _ = writeln!(out, "model      {} (N = {}, h = {})", a.model.model, a.n, a.h);
    let _ = writeln!(out, "solver     {}", a.solver);
    let _ = writeln!(out, "converged  {}", report.converged);
    let _ = writeln!(out, "reason     {:?}", report.reason);
    let _ = writeln!(out, "iterations {}", report.iterations);
    let _ = writeln!(out, "last step  {:.3e}", report.final_step_norm);
    let _ = writeln!(out, "residual   {cert:.3e}");

    if let Some(path) = &a.out {
        let written = create(path).and_then(|mut f| {
            writeln!(f, "model,N,h,solver,seed,converged,iterations,final_step,residual")?;
            writeln!(
                f,
                "{},{},{},{},{},{},{},{},{}",
                a.model.model,
                a.n,
                format_sci(a.h),
                a.solver,
                a.seed,
                u8::from(report.converged),
                report.iterations,
                format_sci(report.final_step_norm),
                format_sci(cert)
            )?;
            f.flush()
        });
        if let Err(e) = written {
            return usage(format!("{}: {e}", path.display()));
        }
    }
    if report.converged {
        EXIT_OK
    } else {
        EXIT_NO_CONVERGENCE
    }
}

pub fn cmd_bench(a: &BenchArgs) -> i32 {
    let mut cfg = BenchConfig::new(a.model.model, a.h, a.max_n);
    cfg.lambda = a.model.lambda;
    cfg.solvers = a.solvers.clone();
    cfg.base_seed = a.base_seed;
    cfg.num_seeds = a.seeds;
    cfg.tol = a.tol.tol;
    cfg.max_iter = a.tol.max_iter;
    if cfg.sizes.is_empty() {
        return usage(format!("no ladder size is ≤ {}", a.max_n));
    }
    // open the output before the sweep so a bad path fails fast
    let sink: Box<dyn Write> = match &a.out {
        Some(path) => match create(path) {
            Ok(f) => Box::new(f),
            Err(e) => return usage(format!("{}: {e}", path.display())),
        },
        None => Box::new(io::stdout().lock()),
    };
    let rows = match bench::run_bench(&cfg) {
        Ok(rows) => rows,
        Err(e) => return usage(e),
    };
    match bench::write_csv(&rows, sink) {
        Ok(()) => EXIT_OK,
        Err(e) => usage(e),
    }
}

pub fn write_trajectory_csv<W: Write>(diag: &TrajectoryDiagnostics, mut out: W) -> io::Result<()> {
    writeln!(out, "{EVOLVE_HEADER}")?;
    for i in 0..diag.len() {
        writeln!(
            out,
            "{},{},{},{},{}",
            diag.steps[i],
            format_sci(diag.times[i]),
            format_sci(diag.hamiltonian[i]),
            format_sci(diag.spectral_drift[i]),
            diag.solver_iterations[i]
        )?;
    }
    out.flush()
}

pub fn cmd_evolve(a: &EvolveArgs) -> i32 {
    let op = match a.model.model.operator(a.n, a.model.lambda) {
        Ok(op) => op,
        Err(e) => return usage(e),
    };
    let cfg = IntegratorConfig {
        record_every: a.record_every,
        solver_cfg: a.tol.config(a.h),
        ..IntegratorConfig::new(a.h, a.steps, a.solver)
    };
    if let Err(e) = cfg.validate() {
        return usage(e);
    }
    let sink: Box<dyn Write> = match &a.out {
        Some(path) => match create(path) {
            Ok(f) => Box::new(f),
            Err(e) => return usage(format!("{}: {e}", path.display())),
        },
        None => Box::new(io::stdout().lock()),
    };
    let y0 = match a.model.model.initial_value(op.as_ref(), a.seed) {
        Ok(y) => y,
        Err(e) => return usage(e),
    };
    match integrator::run(&y0, op.as_ref(), &cfg) {
        Ok(diag) => match write_trajectory_csv(&diag, sink) {
            Ok(()) => EXIT_OK,
            Err(e) => usage(e),
        },
        Err(Error::TrajectoryAborted { step, report, partial }) => {
            let _ = write_trajectory_csv(&partial, sink);
            eprintln!("trajectory aborted at step {step}: {}", report.summary());
            EXIT_ABORTED
        }
        Err(e) => usage(e),
    }
}

pub fn cmd_demo_riccati(a: &RiccatiArgs, out: &mut dyn Write) -> i32 {
    let (x, y) = match (a.x, a.y) {
        (Some(x), Some(y)) => (x, y),
        _ => {
            // x and P from the seed; y = (I − hP)X(I + hP) is then admissible
            let seed = a.seed.unwrap_or(DEFAULT_BASE_SEED);
            let shape = crate::riccati::su2_shape();
            let x = Su2Vector::from_element(&crate::algebra::random_normalized(&shape, seed));
            let p = Su2Vector::from_element(&crate::algebra::random_normalized(&shape, seed + 1));
            match (x, p) {
                (Ok(x), Ok(p)) => (x, congruence(2.0 * p, x, a.h)),
                (Err(e), _) | (_, Err(e)) => return usage(e),
            }
        }
    };
    let _ = writeln!(out, "x = {x}");
    let _ = writeln!(out, "y = {y}");
    let _ = writeln!(out, "h = {}", a.h);
    let branches = match solve_su2_branches(x, y, a.h) {
        Ok(b) => b,
        Err(Error::NoRealSolution(msg)) => {
            let _ = writeln!(out, "no real solution P: {msg}");
            let _ = writeln!(
                out,
                "(along x, h²PXP only enlarges X, so y must not be shorter than x there)"
            );
            return EXIT_NO_CONVERGENCE;
        }
        Err(e) => return usage(e),
    };
    for (sign, b) in [("+", &branches.plus), ("-", &branches.minus)] {
        let _ = writeln!(out, "branch {sign}: p_par  = {}", b.p_parallel);
        let _ = writeln!(out, "          p_perp = {}", b.p_perp);
        let _ = writeln!(out, "          residual {:.3e}", b.residual);
    }
    let verdict = if branches.is_unique() { "UNIQUE" } else { "NON-UNIQUE" };
    let _ = writeln!(out, "verdict: {verdict}");
    EXIT_OK
}
