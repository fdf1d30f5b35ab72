//! End-to-end pipelines, parameter sweeps and the command line.

pub mod cli;
mod pipeline;
mod sweep;

pub use pipeline::{solve_csp_end_to_end, solve_goldreich_end_to_end, CspSolveReport, PipelineOptions, PipelineStatus, Route};
pub use sweep::{load_sweep_spec, parse_sweep_spec, run_sweep, write_sweep_csv, Family, SweepRow, SweepSpec, CSV_HEADER};

use thiserror::Error;

use crate::fourier::FourierError;
use crate::instances::io::FormatError;
use crate::instances::InstanceError;
use crate::reduction::ReductionError;
use crate::solver::SolveError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{}: {source}", path.display())]
    Path { path: std::path::PathBuf, source: std::io::Error },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Input(String),
}
