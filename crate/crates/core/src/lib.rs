//! SIAC (smoothness-increasing accuracy-conserving) convolution filters for
//! discontinuous Galerkin solutions of linear advection.
//!
//! * [`basisfn`]: piecewise trig-polynomial algebra and basis families
//! * [`filtercore`]: node distributions, coefficient solves and kernels
//! * [`dgsolver`]: modal upwind DG for periodic 1D/2D advection
//! * [`postproc`]: convolution of kernels against DG fields
//! * [`harness`]: configuration, convergence sweeps, reports and checks

pub mod basisfn;
pub mod dgsolver;
pub mod filtercore;
pub mod harness;
pub mod postproc;
pub mod quadrature;
