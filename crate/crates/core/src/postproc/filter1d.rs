use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dgsolver::DGField;
use crate::filtercore::FilterKernel;
use crate::quadrature::GaussLegendre;

use super::stencil::{build_stencil, PieceRule, Stencil};
use super::PostError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// Symmetric kernel everywhere, data wrapped periodically.
    #[default]
    PeriodicWrap,
    /// Kernel shifted near the ends so it only reads data inside the domain.
    PositionDependent,
}

/// Which kernel was used at an evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointTag {
    Symmetric,
    Shifted(f64),
}

impl PointTag {
    pub fn label(&self) -> String {
        match self {
            PointTag::Symmetric => "symmetric".into(),
            PointTag::Shifted(l) => format!("shifted({l:e})"),
        }
    }
}

/// Shifted kernels keyed by the exact bits of λ.
#[derive(Debug)]
pub struct ShiftCache {
    base: FilterKernel,
    shifted: Mutex<HashMap<u64, Arc<FilterKernel>>>,
}

impl ShiftCache {
    pub fn new(base: FilterKernel) -> Self {
        Self { base, shifted: Mutex::new(HashMap::new()) }
    }

    pub fn base(&self) -> &FilterKernel {
        &self.base
    }

    pub fn get(&self, shift: f64) -> Result<Arc<FilterKernel>, PostError> {
        let key = shift.to_bits();
        if let Some(k) = self.shifted.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(k));
        }
        let kernel = Arc::new(self.base.shifted(shift)?);
        self.shifted.lock().expect("cache lock").insert(key, Arc::clone(&kernel));
        Ok(kernel)
    }

    pub fn len(&self) -> usize {
        self.shifted.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Stencil for `x̄` under `policy`, with the tag describing the kernel used.
fn point_stencil(
    field: &DGField,
    cache: &ShiftCache,
    rule: &PieceRule,
    x_bar: f64,
    policy: BoundaryPolicy,
) -> Result<(Stencil, PointTag), PostError> {
    let mesh = field.mesh();
    match policy {
        BoundaryPolicy::PeriodicWrap => {
            Ok((build_stencil(mesh, field.k(), cache.base(), rule, x_bar, true)?, PointTag::Symmetric))
        }
        BoundaryPolicy::PositionDependent => {
            let shift = cache.base().boundary_shift(x_bar, (mesh.a, mesh.b))?;
            if shift == 0.0 {
                let s = build_stencil(mesh, field.k(), cache.base(), rule, x_bar, false)?;
                return Ok((s, PointTag::Symmetric));
            }
            let kernel = cache.get(shift)?;
            Ok((build_stencil(mesh, field.k(), &kernel, rule, x_bar, false)?, PointTag::Shifted(shift)))
        }
    }
}

/// `(K_H ⋆ u_h)(x̄)`. The kernel's scaling is used as `H`.
pub fn convolve_point(
    field: &DGField,
    kernel: &FilterKernel,
    x_bar: f64,
    policy: BoundaryPolicy,
) -> Result<f64, PostError> {
    let cache = ShiftCache::new(kernel.clone());
    let rule = PieceRule::for_kernel(kernel, field.k());
    let (stencil, _) = point_stencil(field, &cache, &rule, x_bar, policy)?;
    Ok(stencil.apply(field, 0))
}

/// Filtered values at arbitrary points.
pub fn filter_points(
    field: &DGField,
    kernel: &FilterKernel,
    xs: &[f64],
    policy: BoundaryPolicy,
) -> Result<Vec<(f64, PointTag)>, PostError> {
    let cache = ShiftCache::new(kernel.clone());
    let rule = PieceRule::for_kernel(kernel, field.k());
    xs.par_iter()
        .map(|&x| {
            let (s, tag) = point_stencil(field, &cache, &rule, x, policy)?;
            Ok((s.apply(field, 0), tag))
        })
        .collect()
}

/// Filtered solution on a Gauss grid, one row per point in element-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredField {
    pub k: usize,
    pub kernel: String,
    pub policy: BoundaryPolicy,
    pub points_per_element: usize,
    pub x: Vec<f64>,
    /// Quadrature weights (including the element Jacobian).
    pub weights: Vec<f64>,
    pub u_h: Vec<f64>,
    pub u_star: Vec<f64>,
    pub tags: Vec<PointTag>,
    /// Domain measure, used to normalize L2 norms.
    pub measure: f64,
}

impl FilteredField {
    /// `sqrt(Σ w (u - u*)² / |Ω|)`.
    pub fn l2_error<F: Fn(f64) -> f64>(&self, exact: F) -> f64 {
        let s: f64 =
            self.x.iter().zip(&self.weights).zip(&self.u_star).map(|((&x, &w), &u)| w * (exact(x) - u).powi(2)).sum();
        (s / self.measure).sqrt()
    }

    /// Same norm applied to the unfiltered field.
    pub fn dg_l2_error<F: Fn(f64) -> f64>(&self, exact: F) -> f64 {
        let s: f64 =
            self.x.iter().zip(&self.weights).zip(&self.u_h).map(|((&x, &w), &u)| w * (exact(x) - u).powi(2)).sum();
        (s / self.measure).sqrt()
    }

    pub fn max_error<F: Fn(f64) -> f64>(&self, exact: F) -> f64 {
        self.x.iter().zip(&self.u_star).map(|(&x, &u)| (exact(x) - u).abs()).fold(0.0, f64::max)
    }

    /// CSV with columns `x,u_exact,u_h,u_star,err_h,err_star,policy`.
    pub fn to_csv<F: Fn(f64) -> f64>(&self, exact: F) -> String {
        let mut out = String::from("x,u_exact,u_h,u_star,err_h,err_star,policy\n");
        for i in 0..self.x.len() {
            let u = exact(self.x[i]);
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e},{:e},{}\n",
                self.x[i],
                u,
                self.u_h[i],
                self.u_star[i],
                (u - self.u_h[i]).abs(),
                (u - self.u_star[i]).abs(),
                self.tags[i].label()
            ));
        }
        out
    }
}

pub fn describe_kernel(kernel: &FilterKernel) -> String {
    format!(
        "{} k={} nodes={} H={:e}",
        kernel.basis().kind().name(),
        kernel.k(),
        kernel.nodes().kind().name(),
        kernel.scaling()
    )
}

/// Filters `field` at `points_per_element` Gauss points per element.
/// Periodic filtering reuses one stencil per Gauss point for every element.
pub fn filter_field(
    field: &DGField,
    kernel: &FilterKernel,
    policy: BoundaryPolicy,
    points_per_element: usize,
) -> Result<FilteredField, PostError> {
    if points_per_element == 0 {
        return Err(PostError::Grid("need at least one point per element".into()));
    }
    let mesh = *field.mesh();
    let rule = PieceRule::for_kernel(kernel, field.k());
    let cache = ShiftCache::new(kernel.clone());
    let gauss = GaussLegendre::new(points_per_element);
    let q = points_per_element;
    let total = mesh.n * q;
    let x: Vec<f64> = (0..total).map(|i| mesh.from_reference(i / q, gauss.nodes[i % q])).collect();
    let weights: Vec<f64> = (0..total).map(|i| 0.5 * mesh.h() * gauss.weights[i % q]).collect();
    let u_h: Vec<f64> = (0..total).map(|i| field.evaluate_in(i / q, gauss.nodes[i % q])).collect();

    let (u_star, tags) = match policy {
        BoundaryPolicy::PeriodicWrap => {
            let stencils: Vec<Stencil> = gauss
                .nodes
                .iter()
                .map(|&r| build_stencil(&mesh, field.k(), kernel, &rule, mesh.from_reference(0, r), true))
                .collect::<Result<_, _>>()?;
            let values: Vec<f64> =
                (0..total).into_par_iter().map(|i| stencils[i % q].apply(field, (i / q) as i64)).collect();
            (values, vec![PointTag::Symmetric; total])
        }
        BoundaryPolicy::PositionDependent => {
            let rows: Vec<(f64, PointTag)> = x
                .par_iter()
                .map(|&xb| {
                    let (s, tag) = point_stencil(field, &cache, &rule, xb, policy)?;
                    Ok((s.apply(field, 0), tag))
                })
                .collect::<Result<_, PostError>>()?;
            rows.into_iter().unzip()
        }
    };
    if u_star.iter().any(|v| !v.is_finite()) {
        return Err(PostError::NonFinite);
    }
    Ok(FilteredField {
        k: field.k(),
        kernel: describe_kernel(kernel),
        policy,
        points_per_element,
        x,
        weights,
        u_h,
        u_star,
        tags,
        measure: mesh.length(),
    })
}

/// Largest `|u*(x_{j+1/2}^+) - u*(x_{j+1/2}^-)|`, with the two one-sided
/// values computed from the stencils of the right end of element `j` and
/// the left end of element `j+1`.
pub fn filtered_max_jump(field: &DGField, kernel: &FilterKernel, policy: BoundaryPolicy) -> Result<f64, PostError> {
    let mesh = *field.mesh();
    let n = mesh.n;
    let interfaces: Vec<usize> = match policy {
        BoundaryPolicy::PeriodicWrap => (0..n).collect(),
        BoundaryPolicy::PositionDependent => (0..n - 1).collect(),
    };
    let cache = ShiftCache::new(kernel.clone());
    let rule = PieceRule::for_kernel(kernel, field.k());
    let jumps: Vec<f64> = interfaces
        .par_iter()
        .map(|&j| {
            let next = (j + 1) % n;
            let left_x = mesh.from_reference(j, 1.0);
            let right_x = if next == 0 { mesh.a } else { mesh.from_reference(next, -1.0) };
            let (sl, _) = point_stencil(field, &cache, &rule, left_x, policy)?;
            let (sr, _) = point_stencil(field, &cache, &rule, right_x, policy)?;
            Ok((sl.apply(field, 0) - sr.apply(field, 0)).abs())
        })
        .collect::<Result<_, PostError>>()?;
    Ok(jumps.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basisfn::InitialBasisKind;
    use crate::dgsolver::Mesh1D;
    use crate::filtercore::{build_filter, FilterConfig, NodeKind};

    fn kernel(k: usize, nodes: NodeKind, h: f64) -> FilterKernel {
        build_filter(&FilterConfig::new(k, InitialBasisKind::Box, nodes).with_scaling(h)).unwrap()
    }

    #[test]
    fn constants_are_preserved() {
        let mesh = Mesh1D::unit(16).unwrap();
        let f = DGField::project(mesh, 2, |_| -1.75);
        for nodes in [NodeKind::Standard, NodeKind::compact_default(2)] {
            let kr = kernel(2, nodes, mesh.h());
            for policy in [BoundaryPolicy::PeriodicWrap, BoundaryPolicy::PositionDependent] {
                let ff = filter_field(&f, &kr, policy, 5).unwrap();
                assert!(ff.u_star.iter().all(|v| (v + 1.75).abs() < 1e-13));
            }
        }
    }

    #[test]
    fn periodic_stencil_reuse_matches_direct_convolution() {
        let mesh = Mesh1D::unit(20).unwrap();
        let f = DGField::project(mesh, 1, |x| (2.0 * std::f64::consts::PI * x).cos());
        let kr = kernel(1, NodeKind::Standard, mesh.h());
        let ff = filter_field(&f, &kr, BoundaryPolicy::PeriodicWrap, 3).unwrap();
        for i in [0, 7, 31, 59] {
            let direct = convolve_point(&f, &kr, ff.x[i], BoundaryPolicy::PeriodicWrap).unwrap();
            assert!((direct - ff.u_star[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn position_dependent_tags_and_cache() {
        let mesh = Mesh1D::unit(20).unwrap();
        let f = DGField::project(mesh, 1, |x| x);
        let kr = kernel(1, NodeKind::Standard, mesh.h());
        let ff = filter_field(&f, &kr, BoundaryPolicy::PositionDependent, 3).unwrap();
        assert!(matches!(ff.tags[0], PointTag::Shifted(l) if l < 0.0));
        assert!(matches!(ff.tags[ff.tags.len() - 1], PointTag::Shifted(l) if l > 0.0));
        assert_eq!(ff.tags[30], PointTag::Symmetric);
        // linear data away from any wrap is reproduced everywhere
        for (x, u) in ff.x.iter().zip(&ff.u_star) {
            assert!((x - u).abs() < 1e-13);
        }
    }

    #[test]
    fn csv_has_one_row_per_point() {
        let mesh = Mesh1D::unit(10).unwrap();
        let f = DGField::project(mesh, 1, |x| x * x);
        let kr = kernel(1, NodeKind::Standard, mesh.h());
        let ff = filter_field(&f, &kr, BoundaryPolicy::PeriodicWrap, 4).unwrap();
        let csv = ff.to_csv(|x| x * x);
        assert_eq!(csv.lines().count(), 41);
        assert!(csv.lines().nth(1).unwrap().ends_with(",symmetric"));
    }
}
