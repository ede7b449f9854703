use rayon::prelude::*;

use crate::dgsolver::DGField2D;
use crate::filtercore::FilterKernel;
use crate::quadrature::GaussLegendre;

use super::filter1d::{describe_kernel, BoundaryPolicy};
use super::stencil::{build_stencil, PieceRule, Stencil};
use super::PostError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisOrder {
    XThenY,
    YThenX,
}

/// Filtered 2D solution on a tensor Gauss grid. Points are ordered by
/// element (x fastest), then by Gauss index (x fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredField2D {
    pub k: usize,
    pub kernel: String,
    pub points_per_axis: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub weights: Vec<f64>,
    pub u_h: Vec<f64>,
    pub u_star: Vec<f64>,
    pub measure: f64,
}

impl FilteredField2D {
    pub fn l2_error<F: Fn(f64, f64) -> f64>(&self, exact: F) -> f64 {
        let s: f64 =
            (0..self.x.len()).map(|i| self.weights[i] * (exact(self.x[i], self.y[i]) - self.u_star[i]).powi(2)).sum();
        (s / self.measure).sqrt()
    }

    pub fn dg_l2_error<F: Fn(f64, f64) -> f64>(&self, exact: F) -> f64 {
        let s: f64 =
            (0..self.x.len()).map(|i| self.weights[i] * (exact(self.x[i], self.y[i]) - self.u_h[i]).powi(2)).sum();
        (s / self.measure).sqrt()
    }

    pub fn to_csv<F: Fn(f64, f64) -> f64>(&self, exact: F) -> String {
        let mut out = String::from("x,y,u_exact,u_h,u_star,err_h,err_star,policy\n");
        for i in 0..self.x.len() {
            let u = exact(self.x[i], self.y[i]);
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},symmetric\n",
                self.x[i],
                self.y[i],
                u,
                self.u_h[i],
                self.u_star[i],
                (u - self.u_h[i]).abs(),
                (u - self.u_star[i]).abs()
            ));
        }
        out
    }
}

/// Tensor filtering with periodic wrap along both axes.
pub fn filter_field_2d(
    field: &DGField2D,
    kernel_x: &FilterKernel,
    kernel_y: &FilterKernel,
    policy: BoundaryPolicy,
    points_per_axis: usize,
) -> Result<FilteredField2D, PostError> {
    filter_field_2d_ordered(field, kernel_x, kernel_y, policy, points_per_axis, AxisOrder::XThenY)
}

/// As [`filter_field_2d`], contracting the axes in the given order.
pub fn filter_field_2d_ordered(
    field: &DGField2D,
    kernel_x: &FilterKernel,
    kernel_y: &FilterKernel,
    policy: BoundaryPolicy,
    points_per_axis: usize,
    order: AxisOrder,
) -> Result<FilteredField2D, PostError> {
    if policy != BoundaryPolicy::PeriodicWrap {
        return Err(PostError::Policy("2D filtering supports periodic wrap only".into()));
    }
    if points_per_axis == 0 {
        return Err(PostError::Grid("need at least one point per axis".into()));
    }
    let mesh = *field.mesh();
    let k = field.k();
    let p = k + 1;
    let q = points_per_axis;
    let gauss = GaussLegendre::new(q);
    let stencils = |kernel: &FilterKernel, axis: &crate::dgsolver::Mesh1D| -> Result<Vec<Stencil>, PostError> {
        let rule = PieceRule::for_kernel(kernel, k);
        gauss.nodes.iter().map(|&r| build_stencil(axis, k, kernel, &rule, axis.from_reference(0, r), true)).collect()
    };
    let sx = stencils(kernel_x, &mesh.x)?;
    let sy = stencils(kernel_y, &mesh.y)?;
    let (nx, ny) = (mesh.x.n, mesh.y.n);
    let coeffs = field.coefficients();

    // Contract along one axis first, giving for every target point along that
    // axis the modal coefficients along the other; then contract the second.
    let u_star_at: Vec<f64> = match order {
        AxisOrder::XThenY => {
            // a[(ix*q + gx) * ny*p + iy*p + qm]
            let mut a = vec![0.0; nx * q * ny * p];
            a.par_chunks_mut(ny * p).enumerate().for_each(|(t, out)| {
                let (ix, gx) = (t / q, t % q);
                let st = &sx[gx];
                for iy in 0..ny {
                    for e in 0..st.elements() {
                        let jx = (st.first + ix as i64 + e as i64).rem_euclid(nx as i64) as usize;
                        let c = &coeffs[mesh.index(jx, iy) * p * p..][..p * p];
                        for qm in 0..p {
                            let w = &st.weights[e * p..(e + 1) * p];
                            out[iy * p + qm] += (0..p).map(|pm| w[pm] * c[qm * p + pm]).sum::<f64>();
                        }
                    }
                }
            });
            // values[(ix*q+gx), (iy*q+gy)]
            (0..nx * q * ny * q)
                .into_par_iter()
                .map(|i| {
                    let (tx, ty) = (i % (nx * q), i / (nx * q));
                    let (iy, gy) = (ty / q, ty % q);
                    sy[gy].apply_wrapped(&a[tx * ny * p..(tx + 1) * ny * p], ny, iy as i64)
                })
                .collect()
        }
        AxisOrder::YThenX => {
            // b[(iy*q + gy) * nx*p + ix*p + pm]
            let mut b = vec![0.0; ny * q * nx * p];
            b.par_chunks_mut(nx * p).enumerate().for_each(|(t, out)| {
                let (iy, gy) = (t / q, t % q);
                let st = &sy[gy];
                for ix in 0..nx {
                    for e in 0..st.elements() {
                        let jy = (st.first + iy as i64 + e as i64).rem_euclid(ny as i64) as usize;
                        let c = &coeffs[mesh.index(ix, jy) * p * p..][..p * p];
                        for pm in 0..p {
                            let w = &st.weights[e * p..(e + 1) * p];
                            out[ix * p + pm] += (0..p).map(|qm| w[qm] * c[qm * p + pm]).sum::<f64>();
                        }
                    }
                }
            });
            (0..nx * q * ny * q)
                .into_par_iter()
                .map(|i| {
                    let (tx, ty) = (i % (nx * q), i / (nx * q));
                    let (ix, gx) = (tx / q, tx % q);
                    sx[gx].apply_wrapped(&b[ty * nx * p..(ty + 1) * nx * p], nx, ix as i64)
                })
                .collect()
        }
    };

    // reorder from (global x index, global y index) to element-major rows
    let total = nx * ny * q * q;
    let mut x = Vec::with_capacity(total);
    let mut y = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut u_h = Vec::with_capacity(total);
    let mut u_star = Vec::with_capacity(total);
    let jac = 0.25 * mesh.x.h() * mesh.y.h();
    for iy in 0..ny {
        for ix in 0..nx {
            for gy in 0..q {
                for gx in 0..q {
                    let (r, s) = (gauss.nodes[gx], gauss.nodes[gy]);
                    x.push(mesh.x.from_reference(ix, r));
                    y.push(mesh.y.from_reference(iy, s));
                    weights.push(jac * gauss.weights[gx] * gauss.weights[gy]);
                    u_h.push(field.evaluate_in(ix, iy, r, s));
                    u_star.push(u_star_at[(iy * q + gy) * nx * q + ix * q + gx]);
                }
            }
        }
    }
    if u_star.iter().any(|v| !v.is_finite()) {
        return Err(PostError::NonFinite);
    }
    Ok(FilteredField2D {
        k,
        kernel: format!("{} x {}", describe_kernel(kernel_x), describe_kernel(kernel_y)),
        points_per_axis,
        x,
        y,
        weights,
        u_h,
        u_star,
        measure: mesh.x.length() * mesh.y.length(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basisfn::InitialBasisKind;
    use crate::dgsolver::{DGField, Mesh1D, Mesh2D};
    use crate::filtercore::{build_filter, FilterConfig, NodeKind};
    use crate::postproc::filter_field;

    fn kernel(k: usize, h: f64) -> FilterKernel {
        build_filter(&FilterConfig::new(k, InitialBasisKind::Box, NodeKind::Standard).with_scaling(h)).unwrap()
    }

    #[test]
    fn axis_order_is_immaterial() {
        let mesh = Mesh2D::square(0.0, 1.0, 9).unwrap();
        let f = DGField2D::project(mesh, 2, |x, y| (6.0 * x).sin() * (1.0 + (4.0 * y).cos()) + x * y);
        let kr = kernel(2, mesh.x.h());
        let a = filter_field_2d_ordered(&f, &kr, &kr, BoundaryPolicy::PeriodicWrap, 4, AxisOrder::XThenY).unwrap();
        let b = filter_field_2d_ordered(&f, &kr, &kr, BoundaryPolicy::PeriodicWrap, 4, AxisOrder::YThenX).unwrap();
        for (u, v) in a.u_star.iter().zip(&b.u_star) {
            assert!((u - v).abs() <= 1e-13 * u.abs().max(1.0));
        }
    }

    #[test]
    fn y_independent_field_matches_1d_filter() {
        let m1 = Mesh1D::unit(12).unwrap();
        let mesh = Mesh2D::new(m1, m1);
        let g = |x: f64| (2.0 * std::f64::consts::PI * x).sin();
        let f2 = DGField2D::project(mesh, 1, |x, _| g(x));
        let f1 = DGField::project(m1, 1, g);
        let kr = kernel(1, m1.h());
        let two = filter_field_2d(&f2, &kr, &kr, BoundaryPolicy::PeriodicWrap, 3).unwrap();
        let one = filter_field(&f1, &kr, BoundaryPolicy::PeriodicWrap, 3).unwrap();
        // row (iy=0, gy=0) of element ix holds x points ix*3..ix*3+3
        for ix in 0..12 {
            for gx in 0..3 {
                let i2 = ix * 9 + gx;
                assert!((two.u_star[i2] - one.u_star[ix * 3 + gx]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn boundary_policy_is_rejected() {
        let mesh = Mesh2D::square(0.0, 1.0, 8).unwrap();
        let f = DGField2D::project(mesh, 1, |x, _| x);
        let kr = kernel(1, mesh.x.h());
        assert!(matches!(
            filter_field_2d(&f, &kr, &kr, BoundaryPolicy::PositionDependent, 3),
            Err(PostError::Policy(_))
        ));
    }
}
