//! Modal upwind DG for periodic linear advection in 1D and 2D (tensor).

mod field;
mod io;
mod mesh;
pub mod modal;
mod problem;
mod solver;

use thiserror::Error;

pub use field::{DGField, DGField2D};
pub use io::{dump_field, dump_field_2d, load_field, AnyField, FieldFile, MeshDescriptor, FIELD_FORMAT_VERSION};
pub use mesh::{Mesh1D, Mesh2D};
pub use problem::{AdvectionProblem, Profile};
pub use solver::{
    advance, advance_2d, project_initial, project_initial_2d, rhs_1d, rhs_2d, solve, solve_2d, StepRule, TimeStepping,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DgError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("unsupported polynomial degree {0}")]
    InvalidDegree(usize),
    #[error("invalid time parameter {0}")]
    InvalidTime(f64),
    #[error("solution blew up at t = {time}")]
    Unstable { time: f64 },
    #[error("expected {expected} coefficients, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("field format: {0}")]
    Format(String),
}
