//! Benchmark harness for NMF initialization strategies: dataset loading,
//! the initializer × solver × seed grid, and CSV/SVG output.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod output;
pub mod run;

pub use dataset::{load_csv_matrix, load_pgm_dir, synth_dataset, DataSource, Dataset};
pub use error::{BenchError, Result};
pub use output::{emit_csv, emit_svg_plot, read_csv, PlotOptions};
pub use run::{run_benchmark, BenchReport, RunRecord, RunSpec, SeedLabel};
