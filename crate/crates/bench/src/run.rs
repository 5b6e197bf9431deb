//! The (initializer × solver × replicate) grid.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use nmf_core::init::{derive_seed, initialize, InitMethod, InitParams};
use nmf_core::solvers::{run_nmf, DEFAULT_TOL};
use nmf_core::{SolverConfig, SolverKind};
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{BenchError, Result};

/// Seed column of a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SeedLabel {
    /// Seedless initializer, run once.
    Fixed,
    Seed(u64),
    /// Per-iteration mean over all seeded replicates of a cell.
    Mean,
}

impl fmt::Display for SeedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedLabel::Fixed => f.write_str("-"),
            SeedLabel::Seed(s) => write!(f, "{s}"),
            SeedLabel::Mean => f.write_str("mean"),
        }
    }
}

impl FromStr for SeedLabel {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "-" => Ok(SeedLabel::Fixed),
            "mean" => Ok(SeedLabel::Mean),
            _ => s
                .parse()
                .map(SeedLabel::Seed)
                .map_err(|_| BenchError::Usage(format!("bad seed label `{s}`"))),
        }
    }
}

/// One traced iteration of one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub dataset: String,
    pub init: String,
    pub solver: String,
    pub seed: SeedLabel,
    pub iteration: usize,
    pub objective: f64,
    pub rel_error: f64,
    pub elapsed_ms: f64,
    /// Set on the final record of a run; empty before that.
    pub stop_reason: String,
}

/// A grid cell that raised an error; other cells are unaffected.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub init: String,
    pub solver: String,
    pub seed: SeedLabel,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub records: Vec<RunRecord>,
    pub failures: Vec<CellFailure>,
}

/// Everything needed to run one benchmark grid.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub dataset: Dataset,
    pub rank: usize,
    pub inits: Vec<InitMethod>,
    pub solvers: Vec<SolverKind>,
    /// Replicates per seeded initializer.
    pub seeds: usize,
    pub master_seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    /// Factorize only the first `train_count` columns.
    pub train_count: Option<usize>,
    pub params: InitParams,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    /// Record wall-clock times. Off by default so output is reproducible.
    pub wall_clock: bool,
}

impl RunSpec {
    pub fn new(dataset: Dataset, rank: usize) -> Self {
        Self {
            dataset,
            rank,
            inits: vec![InitMethod::Random],
            solvers: vec![SolverKind::SedMu],
            seeds: 10,
            master_seed: 0,
            max_iter: 500,
            tol: DEFAULT_TOL,
            train_count: None,
            params: InitParams::default(),
            jobs: 0,
            wall_clock: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.inits.is_empty() || self.solvers.is_empty() {
            return Err(BenchError::Usage("at least one initializer and one solver are required".into()));
        }
        if self.seeds == 0 {
            return Err(BenchError::Usage("--seeds must be at least 1".into()));
        }
        SolverConfig {
            tol: self.tol,
            ..SolverConfig::new(self.solvers[0], self.max_iter)
        }
        .validate()?;
        Ok(())
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Seed for replicate `replicate` of a cell: FNV-1a of
/// `dataset \0 init \0 solver \0 replicate`, mixed with the master seed.
pub fn cell_seed(master: u64, dataset: &str, init: &str, solver: &str, replicate: usize) -> u64 {
    let key = format!("{dataset}\0{init}\0{solver}\0{replicate}");
    derive_seed(master, fnv1a(key.as_bytes()))
}

fn round_sig(v: f64) -> f64 {
    if v.is_finite() {
        format!("{v:.9e}").parse().unwrap_or(v)
    } else {
        v
    }
}

struct Cell {
    init: InitMethod,
    solver: SolverKind,
    seed: SeedLabel,
}

fn run_cell(spec: &RunSpec, data: &Dataset, cell: &Cell) -> std::result::Result<Vec<RunRecord>, String> {
    let seed = match cell.seed {
        SeedLabel::Seed(s) => s,
        _ => 0,
    };
    let x = &data.matrix;
    let init = initialize(cell.init, x, spec.rank, &spec.params, seed).map_err(|e| e.to_string())?;
    let cfg = SolverConfig {
        tol: spec.tol,
        ..SolverConfig::new(cell.solver, spec.max_iter)
    };
    let (_, trace) = run_nmf(x, &init, &cfg).map_err(|e| e.to_string())?;
    let last = trace.entries.len().saturating_sub(1);
    Ok(trace
        .entries
        .iter()
        .enumerate()
        .map(|(k, e)| RunRecord {
            dataset: data.name.clone(),
            init: cell.init.name().to_string(),
            solver: cell.solver.name().to_string(),
            seed: cell.seed,
            iteration: e.iteration,
            objective: round_sig(e.objective),
            rel_error: round_sig(e.rel_error),
            elapsed_ms: if spec.wall_clock { round_sig(e.elapsed_ms) } else { 0.0 },
            stop_reason: if k == last {
                trace.stop_reason.name().to_string()
            } else {
                String::new()
            },
        })
        .collect())
}

/// Canonical order: initializer name, solver name, seed label, iteration.
fn record_order(a: &RunRecord, b: &RunRecord) -> Ordering {
    (&a.dataset, &a.init, &a.solver, a.seed, a.iteration).cmp(&(&b.dataset, &b.init, &b.solver, b.seed, b.iteration))
}

/// Per-iteration means over the seeded runs of one cell. Runs that stopped
/// early contribute their final values to later iterations.
fn mean_rows(runs: &[&[RunRecord]]) -> Vec<RunRecord> {
    let len = runs.iter().map(|r| r.len()).max().unwrap_or(0);
    let count = runs.len() as f64;
    (0..len)
        .map(|k| {
            let at = |run: &[RunRecord]| run[k.min(run.len() - 1)].clone();
            let first = at(runs[0]);
            let mean = |f: fn(&RunRecord) -> f64| round_sig(runs.iter().map(|r| f(&at(r))).sum::<f64>() / count);
            RunRecord {
                dataset: first.dataset.clone(),
                init: first.init.clone(),
                solver: first.solver.clone(),
                seed: SeedLabel::Mean,
                iteration: k,
                objective: mean(|r| r.objective),
                rel_error: mean(|r| r.rel_error),
                elapsed_ms: mean(|r| r.elapsed_ms),
                stop_reason: String::new(),
            }
        })
        .collect()
}

/// Runs every cell of the grid. Failed cells are reported in
/// [`BenchReport::failures`] and contribute no records.
pub fn run_benchmark(spec: &RunSpec) -> Result<BenchReport> {
    spec.validate()?;
    let data = match spec.train_count {
        Some(c) => spec.dataset.leading_columns(c)?,
        None => spec.dataset.clone(),
    };
    let mut cells = Vec::new();
    for &init in &spec.inits {
        for &solver in &spec.solvers {
            if init.is_seeded() {
                for rep in 0..spec.seeds {
                    let s = cell_seed(spec.master_seed, &data.name, init.name(), solver.name(), rep);
                    cells.push(Cell {
                        init,
                        solver,
                        seed: SeedLabel::Seed(s),
                    });
                }
            } else {
                cells.push(Cell {
                    init,
                    solver,
                    seed: SeedLabel::Fixed,
                });
            }
        }
    }

    let work = || -> Vec<_> { cells.par_iter().map(|c| (c, run_cell(spec, &data, c))).collect() };
    let outcomes = if spec.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(spec.jobs)
            .build()
            .map_err(|e| BenchError::Usage(format!("thread pool: {e}")))?
            .install(work)
    } else {
        work()
    };

    let mut report = BenchReport::default();
    let mut runs: Vec<Vec<RunRecord>> = Vec::new();
    for (cell, outcome) in outcomes {
        match outcome {
            Ok(records) => runs.push(records),
            Err(message) => report.failures.push(CellFailure {
                init: cell.init.name().to_string(),
                solver: cell.solver.name().to_string(),
                seed: cell.seed,
                message,
            }),
        }
    }
    runs.sort_by(|a, b| record_order(&a[0], &b[0]));
    let mut i = 0;
    while i < runs.len() {
        let mut j = i + 1;
        while j < runs.len() && runs[j][0].init == runs[i][0].init && runs[j][0].solver == runs[i][0].solver {
            j += 1;
        }
        let group = &runs[i..j];
        for run in group {
            report.records.extend(run.iter().cloned());
        }
        if group.len() > 1 {
            let slices: Vec<&[RunRecord]> = group.iter().map(Vec::as_slice).collect();
            report.records.extend(mean_rows(&slices));
        }
        i = j;
    }
    report.records.sort_by(record_order);
    report.failures.sort_by(|a, b| (&a.init, &a.solver, a.seed).cmp(&(&b.init, &b.solver, b.seed)));
    Ok(report)
}
