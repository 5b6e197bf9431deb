//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nmf_core::init::lowrank::select_rank_90;
use nmf_core::init::{InitMethod, InitParams};
use nmf_core::linalg::thin_svd;
use nmf_core::solvers::DEFAULT_TOL;
use nmf_core::SolverKind;

use crate::config::expand_config;
use crate::dataset::DataSource;
use crate::error::{BenchError, Result};
use crate::output::{emit_csv, emit_svg_plot, PlotOptions};
use crate::run::{run_benchmark, RunSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nmfbench", version, about = "Compare NMF initialization strategies")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the initializer × solver × seed grid and write CSV records.
    Run(RunArgs),
    /// List the registered initializers.
    ListInits,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// csv:PATH, pgm:DIR or synth:m,n,r,density,noise
    #[arg(long)]
    pub data: String,
    /// Factorization rank, or `auto` for the 90% singular-value rule.
    /// Defaults to the generating rank for synthetic data, `auto` otherwise.
    #[arg(long)]
    pub rank: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "random")]
    pub init: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "sed-mu")]
    pub solver: Vec<String>,
    /// Replicates per seeded initializer.
    #[arg(long, default_value_t = 10)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub master_seed: u64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Factorize only the first C columns.
    #[arg(long)]
    pub train_count: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write an SVG of relative error per iteration.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long)]
    pub log_y: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "NMFBENCH_JOBS", default_value_t = 0)]
    pub jobs: usize,
    /// Image shape ROWSxCOLS for CSV data holding vectorized images.
    #[arg(long)]
    pub image_shape: Option<String>,
    /// Averaging sample size for random-acol / random-c.
    #[arg(long)]
    pub q: Option<usize>,
    /// Record real elapsed times instead of zeros.
    #[arg(long)]
    pub wall_clock: bool,
}

fn parse_shape(s: &str) -> Result<(usize, usize)> {
    let bad = || BenchError::Usage(format!("bad image shape `{s}`, expected ROWSxCOLS"));
    let (r, c) = s.split_once('x').ok_or_else(bad)?;
    Ok((r.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?))
}

impl RunArgs {
    pub fn to_spec(&self) -> Result<RunSpec> {
        let source: DataSource = self.data.parse()?;
        let mut dataset = source.load(self.master_seed)?;
        if let Some(shape) = &self.image_shape {
            let (r, c) = parse_shape(shape)?;
            if r * c != dataset.matrix.rows() {
                return Err(nmf_core::NmfError::NotAnImageDataset {
                    rows: dataset.matrix.rows(),
                    image_rows: r,
                    image_cols: c,
                }
                .into());
            }
            dataset.image_shape = Some((r, c));
        }
        let inits = self
            .init
            .iter()
            .map(|s| s.trim().parse::<InitMethod>())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let solvers = self
            .solver
            .iter()
            .map(|s| s.trim().parse::<SolverKind>())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let rank_arg = match (&self.rank, &source) {
            (Some(r), _) => r.clone(),
            (None, DataSource::Synth { r, .. }) => r.to_string(),
            (None, _) => "auto".to_string(),
        };
        let rank = if rank_arg == "auto" {
            let x = match self.train_count {
                Some(c) => dataset.leading_columns(c)?.matrix,
                None => dataset.matrix.clone(),
            };
            select_rank_90(&thin_svd(&x)?.sigma)?.get()
        } else {
            rank_arg
                .parse()
                .map_err(|_| BenchError::Usage(format!("bad rank `{rank_arg}`")))?
        };
        Ok(RunSpec {
            inits,
            solvers,
            seeds: self.seeds,
            master_seed: self.master_seed,
            max_iter: self.max_iter,
            tol: self.tol,
            train_count: self.train_count,
            params: InitParams {
                q: self.q,
                image_shape: dataset.image_shape,
                ..InitParams::default()
            },
            jobs: self.jobs,
            wall_clock: self.wall_clock,
            ..RunSpec::new(dataset, rank)
        })
    }
}

fn execute(args: &RunArgs, err: &mut dyn Write) -> Result<i32> {
    let spec = args.to_spec()?;
    if let Some(c) = spec.train_count {
        let unused = spec.dataset.matrix.cols() - c.min(spec.dataset.matrix.cols());
        let _ = writeln!(err, "training on {c} columns; {unused} held-out columns unused");
    }
    let report = run_benchmark(&spec)?;
    emit_csv(&report.records, &args.out)?;
    if let Some(plot) = &args.plot {
        let opts = PlotOptions {
            log_y: args.log_y,
            title: format!("{} (r = {})", spec.dataset.name, spec.rank),
            ..PlotOptions::default()
        };
        emit_svg_plot(&report.records, plot, &opts)?;
    }
    for f in &report.failures {
        let _ = writeln!(err, "cell {}/{}/{} failed: {}", f.init, f.solver, f.seed, f.message);
    }
    Ok(if report.failures.is_empty() { EXIT_OK } else { EXIT_PARTIAL })
}

fn list_inits(out: &mut dyn Write) {
    for m in InitMethod::ALL {
        let kind = if m.is_seeded() { "seeded" } else { "deterministic" };
        let _ = writeln!(out, "{:<12} {:<11} {}", m.name(), m.family(), kind);
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run_cli(args: Vec<OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
            } else {
                let _ = write!(out, "{}", e.render());
            }
            return code;
        }
    };
    match cli.command {
        Command::ListInits => {
            list_inits(out);
            EXIT_OK
        }
        Command::Run(args) => match execute(&args, err) {
            Ok(code) => code,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_USAGE
            }
        },
    }
}
