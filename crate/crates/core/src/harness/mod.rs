//! Experiment configuration, resolution sweeps, reports and the commands
//! behind the `siac` binary.

pub mod acceptance;
mod checks;
pub mod commands;
mod config;
pub mod properties;
mod report;
mod run;

use std::path::PathBuf;

use thiserror::Error;

use crate::dgsolver::DgError;
use crate::filtercore::FilterError;
use crate::postproc::PostError;

pub use checks::{within_factor, Check, Criterion, Status};
pub use config::{
    preset, preset_names, BasisChoice, Experiment, NodeChoice, NodeChoiceKind, Overrides, PolicyChoice, ProblemConfig,
    Reference, RunConfig, QUICK_LIMIT,
};
pub use report::{observed_order, render_table, reports_csv, ConvergenceReport, ReportRow};
pub use run::{
    evaluate_row, exact_at, filter_solution, mesh_1d, mesh_2d, run_experiment, run_kernel, sweep, Filtered, RunRow,
    Solution, SolveCache,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Dg(#[from] DgError),
    #[error(transparent)]
    Post(#[from] PostError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }
}
