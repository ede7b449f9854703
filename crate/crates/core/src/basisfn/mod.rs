//! Compactly supported piecewise trig-polynomial functions and the basis
//! families generated from an initial function by repeated convolution with
//! the unit box.

mod exact;
mod piecewise;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use exact::{f64_to_rational, rational_to_f64, taylor_shift, ExactSpline};
pub use piecewise::{normalize, PiecewiseFunction, Term, TrigPart, BREAKPOINT_MERGE_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("basis order must be at least 1, got {0}")]
    UnsupportedOrder(usize),
    #[error("the bump basis has no closed form; use the quadrature path")]
    QuadratureOnly,
    #[error("initial basis function must have a nonzero integral")]
    ZeroIntegral,
    #[error("malformed piecewise function: {0}")]
    Malformed(String),
}

/// Seed `φ^(1)` of a basis family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialBasisKind {
    /// `χ_[-1/2, 1/2]`, generating the central B-splines.
    Box,
    /// `(1 + cos 2πx) / 2` on `[-1/2, 1/2]`.
    RaisedCosine,
    /// `exp(-1 / (1 - 4x²))` on `(-1/2, 1/2)`; C∞, no closed trig-poly form.
    Bump,
    Custom(PiecewiseFunction),
}

impl InitialBasisKind {
    pub fn is_quadrature_only(&self) -> bool {
        matches!(self, InitialBasisKind::Bump)
    }

    pub fn name(&self) -> &'static str {
        match self {
            InitialBasisKind::Box => "box",
            InitialBasisKind::RaisedCosine => "raised-cosine",
            InitialBasisKind::Bump => "bump",
            InitialBasisKind::Custom(_) => "custom",
        }
    }
}

/// Characteristic function of `[-1/2, 1/2]`.
pub fn unit_box() -> PiecewiseFunction {
    PiecewiseFunction::new(vec![-0.5, 0.5], vec![vec![Term::poly(0, 1.0)]]).expect("valid box")
}

/// Raised-cosine seed `(1 + cos 2πx) / 2` on `[-1/2, 1/2]`.
pub fn raised_cosine() -> PiecewiseFunction {
    PiecewiseFunction::new(vec![-0.5, 0.5], vec![vec![Term::poly(0, 0.5), Term::cos(0, 2.0 * PI, 0.5)]])
        .expect("valid raised cosine")
}

/// The C∞ bump seed, pointwise.
pub fn bump_seed(x: f64) -> f64 {
    if x.abs() < 0.5 {
        (-1.0 / (1.0 - 4.0 * x * x)).exp()
    } else {
        0.0
    }
}

/// Exact convolution with the unit box.
pub fn convolve_with_box(f: &PiecewiseFunction) -> PiecewiseFunction {
    f.convolve_with_box()
}

/// `φ^(order)` of the family seeded by `kind`.
pub fn basis(kind: &InitialBasisKind, order: usize) -> Result<PiecewiseFunction, BasisError> {
    if order < 1 {
        return Err(BasisError::UnsupportedOrder(order));
    }
    let seed = match kind {
        InitialBasisKind::Box => return Ok(ExactSpline::bspline(order).to_piecewise()),
        InitialBasisKind::RaisedCosine => raised_cosine(),
        InitialBasisKind::Bump => return Err(BasisError::QuadratureOnly),
        InitialBasisKind::Custom(f) => {
            if f.integral() == 0.0 {
                return Err(BasisError::ZeroIntegral);
            }
            f.clone()
        }
    };
    Ok((1..order).fold(seed, |acc, _| acc.convolve_with_box()))
}
