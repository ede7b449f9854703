//! Convolution of SIAC kernels with DG fields.

mod divided;
mod filter1d;
mod filter2d;
mod pointwise;
mod stencil;

use thiserror::Error;

use crate::dgsolver::DgError;
use crate::filtercore::FilterError;

pub use divided::{divided_difference, divided_difference_at};
pub use filter1d::{
    convolve_point, describe_kernel, filter_field, filter_points, filtered_max_jump, BoundaryPolicy, FilteredField,
    PointTag, ShiftCache,
};
pub use filter2d::{filter_field_2d, filter_field_2d_ordered, AxisOrder, FilteredField2D};
pub use pointwise::{boundary_markers, dense_grid, pointwise_error, pointwise_samples, PointwiseSample};
pub use stencil::{build_stencil, PieceRule, Stencil};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PostError {
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Dg(#[from] DgError),
    #[error("kernel support {support} exceeds domain length {length}")]
    DomainTooShort { support: f64, length: f64 },
    #[error("kernel window [{lo}, {hi}] leaves the domain")]
    OutsideDomain { lo: f64, hi: f64 },
    #[error("unsupported boundary policy: {0}")]
    Policy(String),
    #[error("bad evaluation grid: {0}")]
    Grid(String),
    #[error("filtered value is not finite")]
    NonFinite,
}
