//! Modal convolution weights.
//!
//! For a point `x̄` the filtered value is
//! `Σ_e Σ_m W[e][m] u_{first+e, m}`, where
//! `W[e][m] = ∫_{I_{first+e}} K_H(x̄ - ξ) P̃_m(r(ξ)) dξ`. The integral is split
//! at element interfaces and at the images of the kernel breakpoints, so each
//! piece has a smooth integrand.

use crate::dgsolver::modal::modal_values;
use crate::dgsolver::{DGField, Mesh1D};
use crate::filtercore::{FilterKernel, KernelBasis};
use crate::quadrature::GaussLegendre;

use super::PostError;

/// Gauss points per piece for trigonometric kernels.
const TRIG_POINTS: usize = 10;
/// Gauss points per piece for quadrature-only kernels.
const SMOOTH_POINTS: usize = 16;
/// Relative disagreement that triggers one bisection for quadrature-only kernels.
const BISECTION_TOL: f64 = 1e-14;
/// Cuts closer than this fraction of `h` are merged.
const CUT_MERGE: f64 = 1e-12;

/// Per-piece quadrature rule for a kernel on a degree-`k` field.
#[derive(Debug, Clone)]
pub enum PieceRule {
    Exact(GaussLegendre),
    Fixed(GaussLegendre),
    Refined(GaussLegendre),
}

impl PieceRule {
    pub fn for_kernel(kernel: &FilterKernel, k: usize) -> Self {
        let basis = kernel.basis();
        if let Some(d) = basis.polynomial_degree() {
            return PieceRule::Exact(GaussLegendre::new((d as usize + k + 2).div_ceil(2)));
        }
        match basis {
            KernelBasis::Bump(_) => PieceRule::Refined(GaussLegendre::new(SMOOTH_POINTS)),
            _ => {
                let poly = (basis.function().map_or(0, |f| f.max_power() as usize) + k + 2).div_ceil(2);
                PieceRule::Fixed(GaussLegendre::new(TRIG_POINTS.max(poly)))
            }
        }
    }

    pub fn points(&self) -> usize {
        match self {
            PieceRule::Exact(g) | PieceRule::Fixed(g) | PieceRule::Refined(g) => g.len(),
        }
    }
}

/// Weights of one evaluation point over a contiguous run of elements.
/// Element indices are unwrapped; `first` may be negative or past `N`
/// under periodic wrap.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub first: i64,
    pub modes: usize,
    pub weights: Vec<f64>,
}

impl Stencil {
    pub fn elements(&self) -> usize {
        self.weights.len() / self.modes
    }

    /// Applies the weights to `coeffs` (element-major, `modes` per element)
    /// with the stencil translated by `offset` elements and wrapped.
    pub fn apply_wrapped(&self, coeffs: &[f64], n: usize, offset: i64) -> f64 {
        let mut acc = 0.0;
        for e in 0..self.elements() {
            let j = (self.first + offset + e as i64).rem_euclid(n as i64) as usize;
            let w = &self.weights[e * self.modes..(e + 1) * self.modes];
            acc += w.iter().zip(&coeffs[j * self.modes..(j + 1) * self.modes]).map(|(a, b)| a * b).sum::<f64>();
        }
        acc
    }

    pub fn apply(&self, field: &DGField, offset: i64) -> f64 {
        self.apply_wrapped(field.coefficients(), field.mesh().n, offset)
    }

    /// `∫K_H`, recovered from the constant-mode weights.
    pub fn mass(&self) -> f64 {
        self.weights.iter().step_by(self.modes).sum::<f64>() * std::f64::consts::SQRT_2
    }
}

/// Builds the stencil of `x̄`. With `wrap = false` the kernel window must
/// lie inside the mesh (up to roundoff, which is clipped).
pub fn build_stencil(
    mesh: &Mesh1D,
    k: usize,
    kernel: &FilterKernel,
    rule: &PieceRule,
    x_bar: f64,
    wrap: bool,
) -> Result<Stencil, PostError> {
    let (s_lo, s_hi) = kernel.support();
    let h = mesh.h();
    if s_hi - s_lo > mesh.length() * (1.0 + 1e-14) {
        return Err(PostError::DomainTooShort { support: s_hi - s_lo, length: mesh.length() });
    }
    let mut lo = x_bar - s_hi;
    let mut hi = x_bar - s_lo;
    if !wrap {
        let slack = 1e-9 * h;
        if lo < mesh.a - slack || hi > mesh.b + slack {
            return Err(PostError::OutsideDomain { lo, hi });
        }
        lo = lo.max(mesh.a);
        hi = hi.min(mesh.b);
    }
    // Each cut carries its position ξ and its kernel argument y = (x̄ - ξ)/H.
    // Kernel breakpoints keep their exact y, so the y pieces tile the kernel
    // support and K is evaluated only inside its own polynomial pieces.
    let scale = kernel.scaling();
    let (k_lo, k_hi) = kernel.unscaled_support();
    let mut raw: Vec<(f64, f64, bool)> = kernel
        .unscaled_breakpoints()
        .into_iter()
        .map(|y| (x_bar - y * scale, y, true))
        .filter(|c| c.0 > lo && c.0 < hi)
        .collect();
    let j_lo = ((lo - mesh.a) / h).floor() as i64;
    let j_hi = ((hi - mesh.a) / h).ceil() as i64;
    let interfaces = (j_lo..=j_hi).map(|j| mesh.a + j as f64 * h).filter(|c| *c > lo && *c < hi);
    raw.extend(interfaces.map(|c| (c, (x_bar - c) / scale, false)));
    raw.push((lo, if wrap { k_hi } else { ((x_bar - lo) / scale).min(k_hi) }, wrap));
    raw.push((hi, if wrap { k_lo } else { ((x_bar - hi) / scale).max(k_lo) }, wrap));
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    // merged cuts keep the exact kernel argument when one is available
    let mut cuts: Vec<(f64, f64, bool)> = Vec::with_capacity(raw.len());
    for c in raw {
        match cuts.last_mut() {
            Some(last) if c.0 - last.0 <= CUT_MERGE * h => {
                if c.2 && !last.2 {
                    last.1 = c.1;
                    last.2 = true;
                }
            }
            _ => cuts.push(c),
        }
    }
    if let Some(last) = cuts.last_mut() {
        last.0 = last.0.max(hi);
    }

    let modes = k + 1;
    let first = ((lo - mesh.a) / h + CUT_MERGE).floor() as i64;
    let last = ((hi - mesh.a) / h - CUT_MERGE).ceil() as i64 - 1;
    let count = (last - first + 1).max(1) as usize;
    let mut weights = vec![0.0; count * modes];
    let mut phi = vec![0.0; modes];
    for w in cuts.windows(2) {
        let ((c0, y0, _), (c1, y1, _)) = (w[0], w[1]);
        if c1 <= c0 || y0 <= y1 {
            continue;
        }
        let j = ((0.5 * (c0 + c1) - mesh.a) / h).floor() as i64;
        let e = (j - first).clamp(0, count as i64 - 1) as usize;
        let left = mesh.a + j as f64 * h;
        let slot = &mut weights[e * modes..(e + 1) * modes];
        // ∫ K_H(x̄ - ξ) P(ξ) dξ over [c0, c1] is ∫ K(y) P(x̄ - H y) dy over [y1, y0]
        let mut integrate = |g: &GaussLegendre, a: f64, b: f64, out: &mut [f64]| {
            for (y, wt) in g.mapped(a, b) {
                let kv = wt * kernel.evaluate_unscaled(y);
                modal_values(2.0 * (x_bar - y * scale - left) / h - 1.0, &mut phi);
                for (o, p) in out.iter_mut().zip(&phi) {
                    *o += kv * p;
                }
            }
        };
        match rule {
            PieceRule::Exact(g) | PieceRule::Fixed(g) => integrate(g, y1, y0, slot),
            PieceRule::Refined(g) => {
                let mut whole = vec![0.0; modes];
                let mut halves = vec![0.0; modes];
                let mid = 0.5 * (y0 + y1);
                integrate(g, y1, y0, &mut whole);
                integrate(g, y1, mid, &mut halves);
                integrate(g, mid, y0, &mut halves);
                let scale = halves.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
                let diff = whole.iter().zip(&halves).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                let pick = if diff > BISECTION_TOL * scale { &halves } else { &whole };
                for (s, v) in slot.iter_mut().zip(pick) {
                    *s += v;
                }
            }
        }
    }
    Ok(Stencil { first, modes, weights })
}
