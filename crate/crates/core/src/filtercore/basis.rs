//! Basis handles used by kernels: closed-form families and the
//! quadrature-only bump family.

use std::sync::OnceLock;

use num::BigRational;

use crate::basisfn::{self, bump_seed, ExactSpline, InitialBasisKind, PiecewiseFunction, TrigPart};
use crate::quadrature::adaptive_gauss_kronrod;

use super::{DoubleDouble, FilterError};

/// Absolute tolerance for bump quadratures.
pub const BUMP_QUAD_TOL: f64 = 1e-15;

/// `φ^(order)` of the bump family, realized as `bump ⋆ ψ^(order-1)`.
#[derive(Debug)]
pub struct BumpBasis {
    order: usize,
    spline: Option<PiecewiseFunction>,
    exact: Option<ExactSpline>,
    seed_moments: OnceLock<Vec<f64>>,
}

const BUMP_MOMENTS: usize = 24;

impl BumpBasis {
    pub fn new(order: usize) -> Self {
        let exact = (order > 1).then(|| ExactSpline::bspline(order - 1));
        let spline = exact.as_ref().map(ExactSpline::to_piecewise);
        Self { order, spline, exact, seed_moments: OnceLock::new() }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn support(&self) -> (f64, f64) {
        let half = self.order as f64 / 2.0;
        (-half, half)
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let Some(spline) = &self.spline else {
            return bump_seed(x);
        };
        let (lo, hi) = self.support();
        if x <= lo || x >= hi {
            return 0.0;
        }
        Self::smooth(|t| spline.evaluate(t), spline.breakpoints(), 1.0, x)
    }

    /// The B-spline factor `ψ^(order-1)` in `φ = bump ⋆ ψ`.
    pub fn spline(&self) -> Option<&ExactSpline> {
        self.exact.as_ref()
    }

    /// `∫ bump(t) f(x - t) dt`, split where `x - t` hits a breakpoint of `f`.
    /// `magnitude` bounds `|f|` and scales the quadrature tolerance.
    pub fn smooth<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64], magnitude: f64, x: f64) -> f64 {
        let tol = BUMP_QUAD_TOL * magnitude.max(1.0);
        let mut cuts = vec![-0.5];
        cuts.extend(breakpoints.iter().map(|b| x - b).filter(|t| *t > -0.5 && *t < 0.5));
        cuts.push(0.5);
        cuts.sort_by(f64::total_cmp);
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| adaptive_gauss_kronrod(|t| bump_seed(t) * f(x - t), w[0], w[1], tol))
            .sum()
    }

    /// `∫ bump`.
    pub fn seed_integral(&self) -> f64 {
        self.seed_moments()[0]
    }

    /// `∫ bump(t) t^i dt`, i < 24.
    fn seed_moments(&self) -> &[f64] {
        self.seed_moments.get_or_init(|| {
            (0..BUMP_MOMENTS)
                .map(|i| {
                    if i % 2 == 1 {
                        0.0
                    } else {
                        2.0 * adaptive_gauss_kronrod(|t| bump_seed(t) * t.powi(i as i32), 0.0, 0.5, BUMP_QUAD_TOL)
                    }
                })
                .collect()
        })
    }

    /// `∫ φ(ξ - shift) ξ^j dξ` via the moment convolution of seed and spline.
    pub fn moment(&self, j: usize, shift: f64) -> f64 {
        let seed = self.seed_moments();
        assert!(j < seed.len(), "bump moments are tabulated up to degree {}", seed.len() - 1);
        // centered moments of φ: sum_i C(p,i) μ_i ν_{p-i}
        let centered = |p: usize| -> f64 {
            match &self.spline {
                None => seed[p],
                Some(spline) => (0..=p).map(|i| binomial(p, i) * seed[i] * spline.moment((p - i) as u32, 0.0)).sum(),
            }
        };
        (0..=j).map(|p| binomial(j, p) * shift.powi((j - p) as i32) * centered(p)).sum()
    }

    /// Points where the basis is not analytic: the half-integer lattice.
    pub fn breakpoints(&self) -> Vec<f64> {
        (0..=self.order).map(|i| i as f64 - self.order as f64 / 2.0).collect()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |b, i| b * (n - i) as f64 / (i + 1) as f64)
}

/// The `φ^(k+1)` a kernel is built from.
#[derive(Debug)]
pub enum KernelBasis {
    /// Central B-spline, carried both exactly and in binary64.
    BSpline {
        order: usize,
        exact: ExactSpline,
        func: PiecewiseFunction,
    },
    /// Any other closed-form family (raised cosine, custom seeds).
    Closed {
        kind: InitialBasisKind,
        order: usize,
        func: PiecewiseFunction,
    },
    Bump(BumpBasis),
}

impl KernelBasis {
    pub fn new(kind: &InitialBasisKind, order: usize) -> Result<Self, FilterError> {
        if order < 1 {
            return Err(basisfn::BasisError::UnsupportedOrder(order).into());
        }
        Ok(match kind {
            InitialBasisKind::Box => {
                let exact = ExactSpline::bspline(order);
                let func = exact.to_piecewise();
                KernelBasis::BSpline { order, exact, func }
            }
            InitialBasisKind::Bump => KernelBasis::Bump(BumpBasis::new(order)),
            other => KernelBasis::Closed { kind: other.clone(), order, func: basisfn::basis(other, order)? },
        })
    }

    pub fn kind(&self) -> InitialBasisKind {
        match self {
            KernelBasis::BSpline { .. } => InitialBasisKind::Box,
            KernelBasis::Closed { kind, .. } => kind.clone(),
            KernelBasis::Bump(_) => InitialBasisKind::Bump,
        }
    }

    pub fn order(&self) -> usize {
        match self {
            KernelBasis::BSpline { order, .. } | KernelBasis::Closed { order, .. } => *order,
            KernelBasis::Bump(b) => b.order(),
        }
    }

    /// Closed-form representation, if one exists.
    pub fn function(&self) -> Option<&PiecewiseFunction> {
        match self {
            KernelBasis::BSpline { func, .. } | KernelBasis::Closed { func, .. } => Some(func),
            KernelBasis::Bump(_) => None,
        }
    }

    pub fn is_quadrature_only(&self) -> bool {
        matches!(self, KernelBasis::Bump(_))
    }

    /// Polynomial degree when every piece is a plain polynomial.
    pub fn polynomial_degree(&self) -> Option<u32> {
        self.function().filter(|f| f.is_polynomial()).map(|f| f.max_power())
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        match self {
            KernelBasis::BSpline { func, .. } | KernelBasis::Closed { func, .. } => func.evaluate(x),
            KernelBasis::Bump(b) => b.evaluate(x),
        }
    }

    /// `φ(x)` with `x` and the result in double-double; `None` for the
    /// bump family, whose values come from binary64 quadrature.
    pub fn evaluate_extended(&self, x: DoubleDouble) -> Option<DoubleDouble> {
        let func = self.function()?;
        let bps = func.breakpoints();
        let t = x.hi();
        if bps.is_empty() || t < bps[0] || t > bps[bps.len() - 1] {
            return Some(DoubleDouble::ZERO);
        }
        let idx = (bps.partition_point(|&b| b <= t) - 1).min(bps.len() - 2);
        let mut trig: Option<(f64, DoubleDouble, DoubleDouble)> = None;
        let mut total = DoubleDouble::ZERO;
        for term in &func.pieces()[idx] {
            let mut v = DoubleDouble::from(term.coeff) * x.powi(term.power);
            if term.trig != TrigPart::None {
                let (sin, cos) = match trig {
                    Some((w, s, c)) if w == term.frequency => (s, c),
                    _ => {
                        let (s, c) = (DoubleDouble::from(term.frequency) * x).sin_cos();
                        trig = Some((term.frequency, s, c));
                        (s, c)
                    }
                };
                v = v * if term.trig == TrigPart::Cos { cos } else { sin };
            }
            total = total + v;
        }
        Some(total)
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            KernelBasis::BSpline { func, .. } | KernelBasis::Closed { func, .. } => {
                func.support().unwrap_or((0.0, 0.0))
            }
            KernelBasis::Bump(b) => b.support(),
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            KernelBasis::BSpline { func, .. } | KernelBasis::Closed { func, .. } => func.breakpoints().to_vec(),
            KernelBasis::Bump(b) => b.breakpoints(),
        }
    }

    /// `∫ φ(ξ - shift) ξ^j dξ` in binary64.
    pub fn moment(&self, j: usize, shift: f64) -> f64 {
        match self {
            KernelBasis::BSpline { func, .. } | KernelBasis::Closed { func, .. } => func.moment(j as u32, shift),
            KernelBasis::Bump(b) => b.moment(j, shift),
        }
    }

    /// Exact shifted moment, available for the B-spline family only.
    pub fn exact_moment(&self, j: usize, shift: &BigRational) -> Option<BigRational> {
        match self {
            KernelBasis::BSpline { exact, .. } => Some(exact.moment(j, shift)),
            _ => None,
        }
    }

    pub fn integral(&self) -> f64 {
        self.moment(0, 0.0)
    }
}
