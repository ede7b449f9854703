use crate::dgsolver::DGField;
use crate::filtercore::FilterKernel;

use super::filter1d::{filter_points, BoundaryPolicy, PointTag};
use super::PostError;

/// One row of a point-wise error plot.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseSample {
    pub x: f64,
    pub exact: f64,
    pub u_h: f64,
    pub u_star: f64,
    pub tag: PointTag,
}

impl PointwiseSample {
    pub fn err_h(&self) -> f64 {
        (self.exact - self.u_h).abs()
    }

    pub fn err_star(&self) -> f64 {
        (self.exact - self.u_star).abs()
    }
}

/// `|u - v|` at each point.
pub fn pointwise_error<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(approx: F, exact: G, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| (exact(x) - approx(x)).abs()).collect()
}

/// `points_per_element` evenly spaced points strictly inside each element.
pub fn dense_grid(field: &DGField, points_per_element: usize) -> Vec<f64> {
    let mesh = field.mesh();
    (0..mesh.n)
        .flat_map(|j| {
            (0..points_per_element).map(move |i| mesh.left(j) + (i as f64 + 0.5) * mesh.h() / points_per_element as f64)
        })
        .collect()
}

pub fn pointwise_samples<G: Fn(f64) -> f64>(
    field: &DGField,
    kernel: &FilterKernel,
    exact: G,
    xs: &[f64],
    policy: BoundaryPolicy,
) -> Result<Vec<PointwiseSample>, PostError> {
    let filtered = filter_points(field, kernel, xs, policy)?;
    Ok(xs
        .iter()
        .zip(filtered)
        .map(|(&x, (u_star, tag))| PointwiseSample { x, exact: exact(x), u_h: field.evaluate(x), u_star, tag })
        .collect())
}

/// Points where the kernel switches between shifted and symmetric:
/// `a + s_hi H` and `b + s_lo H` for support `(s_lo, s_hi)`.
pub fn boundary_markers(kernel: &FilterKernel, domain: (f64, f64)) -> (f64, f64) {
    let (lo, hi) = kernel.support();
    let shift = kernel.nodes().shift() * kernel.scaling();
    (domain.0 + hi - shift, domain.1 + lo - shift)
}
