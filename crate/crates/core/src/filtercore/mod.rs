//! Kernel construction: node layouts, moment systems, coefficient solves,
//! kernel evaluation, boundary shifts and export.

mod basis;
mod collapsed;
mod export;
mod extended;
mod kernel;
mod nodes;
mod solve;
mod tensor;

use thiserror::Error;

use crate::basisfn::BasisError;

pub use basis::{BumpBasis, KernelBasis, BUMP_QUAD_TOL};
pub use collapsed::LocalPolynomialKernel;
pub use export::{export_kernel, import_kernel, KernelExport};
pub use extended::DoubleDouble;
pub use kernel::{boundary_shift, boundary_shift_for, build_filter, reproduction_residual, FilterConfig, FilterKernel};
pub use nodes::{make_nodes, NodeDistribution, NodeKind};
pub use solve::{
    exact_moment_matrix, moment_matrix, moment_residual, solve_coefficients, solve_coefficients_dd,
    solve_coefficients_exact, solve_extended, solve_extended_dd, solve_rational, split_rational, MAX_CONDITION,
};
pub use tensor::{tensor2d, TensorKernel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    #[error("polynomial degree must be at least 1, got {0}")]
    InvalidDegree(usize),
    #[error("compression factor must lie in (0, 1], got {0}")]
    InvalidEpsilon(f64),
    #[error("invalid nodes: {0}")]
    InvalidNodes(String),
    #[error("scaling must be positive and finite, got {0}")]
    InvalidScaling(f64),
    #[error("moment system is ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("kernel support {support} exceeds domain length {length}")]
    DomainTooShort { support: f64, length: f64 },
    #[error("point {x} outside domain [{a}, {b}]")]
    OutsideDomain { x: f64, a: f64, b: f64 },
    #[error("kernel import failed: {0}")]
    Import(String),
}
