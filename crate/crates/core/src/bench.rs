//! Solver comparison sweeps: mean iteration counts over random right-hand
//! sides for each model, size and solver, written as CSV.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::algebra::{random_normalized, random_unit_spins, AlgebraElement};
use crate::error::{Error, Result};
use crate::operators::{DriftAlfvenOperator, EulerSphereOperator, LinearOperator, SpinChainOperator};
use crate::solvers::{solve, SolverConfig, SolverKind, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// Sizes `2^k + 1` used by default, capped by `max_n`.
pub const N_LADDER: [usize; 10] = [3, 5, 9, 17, 33, 65, 129, 257, 513, 1025];
pub const DEFAULT_BASE_SEED: u64 = 42;
pub const DEFAULT_NUM_SEEDS: usize = 10;
pub const DEFAULT_LAMBDA: f64 = 5.0;

pub const BENCH_HEADER: &str =
    "model,N,h,solver,seeds,mean_iter,converged_frac,mean_wall_s,residual_max";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    Euler,
    Alfven,
    Chain,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Euler, Model::Alfven, Model::Chain];

    pub fn name(self) -> &'static str {
        match self {
            Model::Euler => "euler",
            Model::Alfven => "alfven",
            Model::Chain => "chain",
        }
    }

    /// The model operator. `n` is the matrix size for `euler`/`alfven` and
    /// the number of particles for `chain`.
    pub fn operator(self, n: usize, lambda: f64) -> Result<Box<dyn LinearOperator>> {
        Ok(match self {
            Model::Euler => Box::new(EulerSphereOperator::new(n)?),
            Model::Alfven => Box::new(DriftAlfvenOperator::new(n, lambda)?),
            Model::Chain => Box::new(SpinChainOperator::new(n)?),
        })
    }

    /// Random right-hand side for `seed`. Vorticity fields are scaled to unit
    /// norm as a whole; chains get unit spins.
    pub fn initial_value(self, op: &dyn LinearOperator, seed: u64) -> Result<AlgebraElement> {
        match self {
            Model::Chain => random_unit_spins(op.shape().num_blocks(), seed),
            _ => Ok(random_normalized(op.shape(), seed)),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchCell {
    pub model: Model,
    pub n: usize,
    pub h: f64,
    pub lambda: f64,
    pub solver: SolverKind,
    pub seeds: Vec<u64>,
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub model: Model,
    pub n: usize,
    pub h: f64,
    pub solver: SolverKind,
    pub seeds: usize,
    /// `None` unless every seed converged.
    pub mean_iterations: Option<f64>,
    pub converged_frac: f64,
    pub mean_wall_s: f64,
    pub residual_max: f64,
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.model,
            self.n,
            format_sci(self.h),
            self.solver,
            self.seeds,
            self.mean_iterations.map(format_sci).unwrap_or_default(),
            format_sci(self.converged_frac),
            format_sci(self.mean_wall_s),
            format_sci(self.residual_max),
        )
    }
}

/// Runs one cell, seeds in parallel.
pub fn run_cell(cell: &BenchCell) -> Result<BenchRow> {
    if cell.seeds.is_empty() {
        return Err(Error::InvalidArgument("a bench cell needs at least one seed".into()));
    }
    let op = cell.model.operator(cell.n, cell.lambda)?;
    let cfg = SolverConfig { tol: cell.tol, max_iter: cell.max_iter, ..SolverConfig::with_h(cell.h) };
    cfg.validate()?;
    let results = cell
        .seeds
        .par_iter()
        .map(|&seed| {
            let y = cell.model.initial_value(op.as_ref(), seed)?;
            let start = Instant::now();
            let (_, report) = solve(cell.solver, &y, op.as_ref(), &cfg)?;
            Ok((report, start.elapsed().as_secs_f64()))
        })
        .collect::<Result<Vec<_>>>()?;

    let count = results.len() as f64;
    let converged = results.iter().filter(|(r, _)| r.converged).count();
    let mean_iterations = (converged == results.len())
        .then(|| results.iter().map(|(r, _)| r.iterations as f64).sum::<f64>() / count);
    let residual_max = results.iter().map(|(r, _)| r.residual_norm).fold(0.0, |m: f64, v| {
        if v.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(v)
        }
    });
    Ok(BenchRow {
        model: cell.model,
        n: cell.n,
        h: cell.h,
        solver: cell.solver,
        seeds: results.len(),
        mean_iterations,
        converged_frac: converged as f64 / count,
        mean_wall_s: results.iter().map(|(_, t)| t).sum::<f64>() / count,
        residual_max,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub model: Model,
    pub h: f64,
    pub lambda: f64,
    pub solvers: Vec<SolverKind>,
    pub sizes: Vec<usize>,
    pub base_seed: u64,
    pub num_seeds: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl BenchConfig {
    pub fn new(model: Model, h: f64, max_n: usize) -> Self {
        Self {
            model,
            h,
            lambda: DEFAULT_LAMBDA,
            solvers: SolverKind::ALL.to_vec(),
            sizes: ladder(max_n),
            base_seed: DEFAULT_BASE_SEED,
            num_seeds: DEFAULT_NUM_SEEDS,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn cells(&self) -> Vec<BenchCell> {
        let seeds: Vec<u64> = (0..self.num_seeds as u64).map(|k| self.base_seed + k).collect();
        let mut cells = Vec::new();
        for &n in &self.sizes {
            for &solver in &self.solvers {
                cells.push(BenchCell {
                    model: self.model,
                    n,
                    h: self.h,
                    lambda: self.lambda,
                    solver,
                    seeds: seeds.clone(),
                    tol: self.tol,
                    max_iter: self.max_iter,
                });
            }
        }
        cells.sort_by_key(|a| (a.n, a.solver));
        cells.dedup_by(|a, b| (a.n, a.solver) == (b.n, b.solver));
        cells
    }
}

/// Ladder entries not exceeding `max_n`.
pub fn ladder(max_n: usize) -> Vec<usize> {
    N_LADDER.iter().copied().filter(|&n| n <= max_n).collect()
}

/// All rows, sorted by `(N, solver)`.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    cfg.cells().par_iter().map(run_cell).collect()
}

pub fn write_csv<W: Write>(rows: &[BenchRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{BENCH_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_csv())?;
    }
    out.flush()
}

/// C-style `%.9e`: ten significant digits and an exponent of at least two
/// digits (`1.500000000e-01`).
pub fn format_sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.9e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_format_matches_printf() {
        assert_eq!(format_sci(0.5), "5.000000000e-01");
        assert_eq!(format_sci(12.0), "1.200000000e+01");
        assert_eq!(format_sci(0.0), "0.000000000e+00");
        assert_eq!(format_sci(-3.25e-120), "-3.250000000e-120");
        assert_eq!(format_sci(1.0), "1.000000000e+00");
        assert_eq!(format_sci(f64::NAN), "nan");
    }

    #[test]
    fn ladder_caps() {
        assert_eq!(ladder(33), vec![3, 5, 9, 17, 33]);
        assert_eq!(ladder(2), Vec::<usize>::new());
        assert_eq!(ladder(2000).len(), 10);
    }

    #[test]
    fn model_parsing() {
        assert_eq!("Chain".parse::<Model>().unwrap(), Model::Chain);
        assert!("navier".parse::<Model>().is_err());
    }

    #[test]
    fn row_count_and_order() {
        let mut cfg = BenchConfig::new(Model::Euler, 0.5, 9);
        cfg.solvers = vec![SolverKind::Newton, SolverKind::Explicit];
        cfg.num_seeds = 2;
        let rows = run_bench(&cfg).unwrap();
        let keys: Vec<_> = rows.iter().map(|r| (r.n, r.solver)).collect();
        assert_eq!(
            keys,
            vec![
                (3, SolverKind::Explicit),
                (3, SolverKind::Newton),
                (5, SolverKind::Explicit),
                (5, SolverKind::Newton),
                (9, SolverKind::Explicit),
                (9, SolverKind::Newton),
            ]
        );
        assert!(rows.iter().all(|r| r.converged_frac == 1.0 && r.mean_iterations.is_some()));
    }

    #[test]
    fn nc_rows_have_empty_mean() {
        let cell = BenchCell {
            model: Model::Chain,
            n: 9,
            h: 0.5,
            lambda: DEFAULT_LAMBDA,
            solver: SolverKind::Explicit,
            seeds: vec![42, 43],
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        };
        let row = run_cell(&cell).unwrap();
        assert!(row.converged_frac < 1.0);
        assert_eq!(row.to_csv().split(',').nth(5), Some(""));
    }
}
