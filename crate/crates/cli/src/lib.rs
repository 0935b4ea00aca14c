//! Benchmark, histogram and diagnostics runner for the vertical-likelihood
//! estimators in `vlmc`.

pub mod bench;
pub mod config;
pub mod diag;
pub mod error;
pub mod hist;

pub use bench::{run_benchmark, BenchmarkTable, TableRow};
pub use config::{ExperimentConfig, MethodSpec, ProblemSpec, WeightSpec};
pub use diag::{run_diagnostics, DiagReport};
pub use error::{CliError, CliResult};
pub use hist::export_ordinate_histograms;
