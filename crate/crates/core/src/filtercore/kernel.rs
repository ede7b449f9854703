use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basisfn::{InitialBasisKind, BREAKPOINT_MERGE_TOL};
use crate::quadrature::GaussLegendre;

use crate::basisfn::f64_to_rational;

use super::{
    make_nodes, solve_coefficients_dd, BumpBasis, DoubleDouble, FilterError, KernelBasis, LocalPolynomialKernel,
    NodeDistribution, NodeKind,
};

/// Everything needed to build a kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub k: usize,
    pub basis: InitialBasisKind,
    pub nodes: NodeKind,
    /// Uniform node offset λ (0 for symmetric filtering).
    #[serde(default)]
    pub shift: f64,
    /// Scaling H applied at evaluation.
    #[serde(default = "unit_scaling")]
    pub scaling: f64,
}

fn unit_scaling() -> f64 {
    1.0
}

impl FilterConfig {
    pub fn new(k: usize, basis: InitialBasisKind, nodes: NodeKind) -> Self {
        Self { k, basis, nodes, shift: 0.0, scaling: 1.0 }
    }

    pub fn with_scaling(mut self, scaling: f64) -> Self {
        self.scaling = scaling;
        self
    }
}

/// `K_H(x) = (1/H) Σ_γ c_γ φ^(k+1)(x/H - x_γ)`.
#[derive(Debug, Clone)]
pub struct FilterKernel {
    k: usize,
    basis: Arc<KernelBasis>,
    nodes: NodeDistribution,
    coefficients: Vec<f64>,
    /// Low words: `coefficients[i] + corrections[i]` is the double-double solution.
    corrections: Vec<f64>,
    scaling: f64,
    /// `Σ c_γ ψ(y - x_γ)` collapsed exactly, with `ψ` the basis itself for
    /// the B-spline family and the B-spline factor of the bump family.
    local: Option<Arc<LocalPolynomialKernel>>,
}

pub fn build_filter(config: &FilterConfig) -> Result<FilterKernel, FilterError> {
    let nodes = make_nodes(config.k, config.nodes.clone(), config.shift)?;
    let basis = Arc::new(KernelBasis::new(&config.basis, config.k + 1)?);
    let coefficients = solve_coefficients_dd(&basis, &nodes)?;
    FilterKernel::from_parts_extended(basis, nodes, coefficients, config.scaling)
}

impl FilterKernel {
    /// Assembles a kernel from already-solved pieces; no reproduction check.
    pub fn from_parts(
        basis: Arc<KernelBasis>,
        nodes: NodeDistribution,
        coefficients: Vec<f64>,
        scaling: f64,
    ) -> Result<Self, FilterError> {
        let corrections = vec![0.0; coefficients.len()];
        Self::assemble(basis, nodes, coefficients, corrections, scaling)
    }

    /// [`FilterKernel::from_parts`] keeping both words of each coefficient.
    pub fn from_parts_extended(
        basis: Arc<KernelBasis>,
        nodes: NodeDistribution,
        coefficients: Vec<DoubleDouble>,
        scaling: f64,
    ) -> Result<Self, FilterError> {
        let (hi, lo) = coefficients.iter().map(|c| (c.hi(), c.lo())).unzip();
        Self::assemble(basis, nodes, hi, lo, scaling)
    }

    fn assemble(
        basis: Arc<KernelBasis>,
        nodes: NodeDistribution,
        coefficients: Vec<f64>,
        corrections: Vec<f64>,
        scaling: f64,
    ) -> Result<Self, FilterError> {
        if !(scaling > 0.0 && scaling.is_finite()) {
            return Err(FilterError::InvalidScaling(scaling));
        }
        if coefficients.len() != nodes.nodes().len() || corrections.len() != coefficients.len() {
            return Err(FilterError::InvalidNodes(format!(
                "{} coefficients for {} nodes",
                coefficients.len(),
                nodes.nodes().len()
            )));
        }
        let local = match basis.as_ref() {
            KernelBasis::BSpline { exact, .. } => Some(exact),
            KernelBasis::Bump(b) => b.spline(),
            KernelBasis::Closed { .. } => None,
        }
        .map(|spline| {
            let weights: Vec<_> =
                coefficients.iter().zip(&corrections).map(|(&c, &l)| f64_to_rational(c) + f64_to_rational(l)).collect();
            Arc::new(LocalPolynomialKernel::from_bspline_exact(spline, nodes.nodes(), &weights))
        });
        Ok(Self { k: nodes.k(), basis, nodes, coefficients, corrections, scaling, local })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn basis(&self) -> &KernelBasis {
        &self.basis
    }

    pub fn basis_handle(&self) -> Arc<KernelBasis> {
        Arc::clone(&self.basis)
    }

    pub fn nodes(&self) -> &NodeDistribution {
        &self.nodes
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn corrections(&self) -> &[f64] {
        &self.corrections
    }

    pub fn scaling(&self) -> f64 {
        self.scaling
    }

    pub fn with_scaling(&self, scaling: f64) -> Result<Self, FilterError> {
        if !(scaling > 0.0 && scaling.is_finite()) {
            return Err(FilterError::InvalidScaling(scaling));
        }
        Ok(Self { scaling, ..self.clone() })
    }

    /// Same basis and layout with node offset `shift`; coefficients re-solved.
    pub fn shifted(&self, shift: f64) -> Result<Self, FilterError> {
        let nodes = self.nodes.with_shift(shift)?;
        let coefficients = solve_coefficients_dd(&self.basis, &nodes)?;
        Self::from_parts_extended(Arc::clone(&self.basis), nodes, coefficients, self.scaling)
    }

    /// Support in kernel units (before scaling).
    pub fn unscaled_support(&self) -> (f64, f64) {
        let (lo, hi) = self.basis.support();
        (self.nodes.first() + lo, self.nodes.last() + hi)
    }

    pub fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.unscaled_support();
        (lo * self.scaling, hi * self.scaling)
    }

    /// Unscaled support width: `3k+1` standard, `(2ε+1)k+1` compact.
    pub fn support_width(&self) -> f64 {
        let (lo, hi) = self.unscaled_support();
        hi - lo
    }

    /// Sorted breakpoints in kernel units: the cuts of the collapsed form
    /// when present, otherwise every basis breakpoint under every node shift.
    pub fn unscaled_breakpoints(&self) -> Vec<f64> {
        if let (Some(local), KernelBasis::BSpline { .. }) = (&self.local, self.basis.as_ref()) {
            return local.breakpoints().to_vec();
        }
        let base = self.basis.breakpoints();
        let mut pts: Vec<f64> = self.nodes.nodes().iter().flat_map(|&x| base.iter().map(move |&b| b + x)).collect();
        pts.sort_by(f64::total_cmp);
        let mut merged: Vec<f64> = Vec::with_capacity(pts.len());
        for p in pts {
            match merged.last() {
                Some(&last) if p - last <= BREAKPOINT_MERGE_TOL => {}
                _ => merged.push(p),
            }
        }
        merged
    }

    /// Sorted breakpoints of the scaled kernel.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.unscaled_breakpoints().into_iter().map(|b| b * self.scaling).collect()
    }

    /// `Σ c_γ φ(y - x_γ)` summed term by term, bypassing the collapsed form.
    /// Closed-form bases are summed in double-double: the `c_γ` of compact
    /// and shifted kernels reach 1e5 and cancel.
    pub fn evaluate_direct(&self, y: f64) -> f64 {
        let terms = self.nodes.nodes().iter().zip(self.coefficients.iter().zip(&self.corrections));
        if self.basis.function().is_some() {
            return terms
                .fold(DoubleDouble::ZERO, |acc, (&x, (&c, &l))| {
                    let v = self.basis.evaluate_extended(DoubleDouble::sum(y, -x)).unwrap_or_default();
                    acc + DoubleDouble::new(c, l) * v
                })
                .to_f64();
        }
        terms
            .map(|(&x, (&c, &l))| {
                let v = self.basis.evaluate(y - x);
                c * v + l * v
            })
            .sum()
    }

    /// `K(y)` in kernel units (scaling ignored).
    pub fn evaluate_unscaled(&self, y: f64) -> f64 {
        let (lo, hi) = self.unscaled_support();
        if y < lo || y > hi {
            return 0.0;
        }
        match (&self.local, self.basis.as_ref()) {
            (Some(local), KernelBasis::BSpline { .. }) => return local.evaluate(y),
            (Some(local), KernelBasis::Bump(_)) => {
                return BumpBasis::smooth(|t| local.evaluate(t), local.breakpoints(), local.magnitude(), y);
            }
            _ => {}
        }
        self.evaluate_direct(y)
    }

    /// `K_H(x)`; zero outside the scaled support.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.evaluate_unscaled(x / self.scaling) / self.scaling
    }

    /// `Σ c_γ ∫φ`, which equals 1 for a valid kernel.
    pub fn integral(&self) -> f64 {
        match (&self.local, self.basis.as_ref()) {
            (Some(local), KernelBasis::BSpline { .. }) => return local.integral(),
            (Some(local), KernelBasis::Bump(b)) => return b.seed_integral() * local.integral(),
            _ => {}
        }
        let sum = self
            .coefficients
            .iter()
            .zip(&self.corrections)
            .fold(DoubleDouble::ZERO, |acc, (&c, &l)| acc + DoubleDouble::from(c) + DoubleDouble::from(l));
        (sum * DoubleDouble::from(self.basis.integral())).to_f64()
    }

    /// Gauss nodes over every kernel piece with `K_H` folded into the weights.
    pub fn quadrature_table(&self, points: usize, subdivisions: usize) -> Vec<(f64, f64)> {
        let rule = GaussLegendre::new(points);
        let bps = self.breakpoints();
        let mut table = Vec::new();
        for w in bps.windows(2) {
            let step = (w[1] - w[0]) / subdivisions as f64;
            for s in 0..subdivisions {
                let a = w[0] + s as f64 * step;
                let b = if s + 1 == subdivisions { w[1] } else { a + step };
                table.extend(rule.mapped(a, b).map(|(y, wt)| (y, wt * self.evaluate(y))));
            }
        }
        table
    }

    /// Kernel-based boundary shift for evaluation point `x̄` in `domain`.
    pub fn boundary_shift(&self, x_bar: f64, domain: (f64, f64)) -> Result<f64, FilterError> {
        let (lo, hi) = self.unscaled_support();
        let s = self.nodes.shift();
        boundary_shift((lo - s, hi - s), x_bar, domain, self.scaling)
    }
}

/// Worst `|(K ⋆ x^m)(x) - x^m|` over `xs`; the convolution is done by
/// Gauss quadrature on the kernel pieces, independent of the moment solve.
pub fn reproduction_residual(kernel: &FilterKernel, m: u32, xs: &[f64]) -> f64 {
    let subdivisions = if kernel.basis().is_quadrature_only() { 4 } else { 1 };
    let table = kernel.quadrature_table(24, subdivisions);
    xs.iter()
        .map(|&x| {
            let conv: f64 = table.iter().map(|&(y, wk)| wk * (x - y).powi(m as i32)).sum();
            (conv - x.powi(m as i32)).abs()
        })
        .fold(0.0, f64::max)
}

/// Node offset λ (in kernel units, applied as `x_γ + λ`) of smallest
/// magnitude such that the data window of the kernel centered at `x̄`,
/// `[x̄ - H(s_hi + λ), x̄ - H(s_lo + λ)]`, lies inside `domain`.
///
/// `support` is the unshifted kernel support `(s_lo, s_hi)`. Near the left
/// boundary λ is negative: the kernel then only reads data to the right of `x̄`.
pub fn boundary_shift(support: (f64, f64), x_bar: f64, domain: (f64, f64), scaling: f64) -> Result<f64, FilterError> {
    let (a, b) = domain;
    let (s_lo, s_hi) = support;
    if !(a <= x_bar && x_bar <= b) {
        return Err(FilterError::OutsideDomain { x: x_bar, a, b });
    }
    let width = (s_hi - s_lo) * scaling;
    if width > b - a {
        return Err(FilterError::DomainTooShort { support: width, length: b - a });
    }
    let upper = (x_bar - a) / scaling - s_hi;
    let lower = (x_bar - b) / scaling - s_lo;
    Ok(if upper < 0.0 {
        upper
    } else if lower > 0.0 {
        lower
    } else {
        0.0
    })
}

/// [`boundary_shift`] for a unit-width seed family of degree `k`.
pub fn boundary_shift_for(
    k: usize,
    kind: &NodeKind,
    x_bar: f64,
    domain: (f64, f64),
    scaling: f64,
) -> Result<f64, FilterError> {
    let nodes = make_nodes(k, kind.clone(), 0.0)?;
    let half = (k + 1) as f64 / 2.0;
    boundary_shift((nodes.first() - half, nodes.last() + half), x_bar, domain, scaling)
}
