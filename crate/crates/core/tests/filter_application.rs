use std::f64::consts::PI;

use proptest::prelude::*;

use siac::basisfn::InitialBasisKind;
use siac::dgsolver::{solve, AdvectionProblem, DGField, DGField2D, Mesh1D, Mesh2D, Profile, TimeStepping};
use siac::filtercore::{build_filter, FilterConfig, FilterKernel, NodeKind};
use siac::postproc::{
    boundary_markers, convolve_point, divided_difference, divided_difference_at, filter_field, filter_field_2d,
    filter_field_2d_ordered, filtered_max_jump, pointwise_samples, AxisOrder, BoundaryPolicy, PointTag, PostError,
};

fn scaled(k: usize, kind: InitialBasisKind, nodes: NodeKind, h: f64) -> FilterKernel {
    build_filter(&FilterConfig::new(k, kind, nodes).with_scaling(h)).unwrap()
}

fn families() -> Vec<InitialBasisKind> {
    vec![InitialBasisKind::Box, InitialBasisKind::RaisedCosine, InitialBasisKind::Bump]
}

#[test]
fn constants_pass_through_every_kernel() {
    let n = 20;
    let mesh = Mesh1D::unit(n).unwrap();
    for kind in families() {
        for k in 1..=3 {
            for nodes in [NodeKind::Standard, NodeKind::compact_default(k)] {
                let kernel = scaled(k, kind.clone(), nodes, mesh.h());
                let field = DGField::project(mesh, k, |_| 1.7);
                for policy in [BoundaryPolicy::PeriodicWrap, BoundaryPolicy::PositionDependent] {
                    let out = filter_field(&field, &kernel, policy, k + 1).unwrap();
                    let worst = out.u_star.iter().map(|u| (u - 1.7).abs()).fold(0.0, f64::max);
                    assert!(worst <= 1.7 * 1e-13, "{} {policy:?}: {worst:e}", out.kernel);
                }
            }
        }
    }
}

#[test]
fn representable_polynomials_are_reproduced_up_to_the_boundary() {
    let mesh = Mesh1D::unit(40).unwrap();
    for kind in [InitialBasisKind::Box, InitialBasisKind::RaisedCosine] {
        for k in 1..=3 {
            let f = move |x: f64| 0.3 + x.powi(k as i32) - 0.5 * x;
            let field = DGField::project(mesh, k, f);
            for nodes in [NodeKind::Standard, NodeKind::compact_default(k)] {
                let kernel = scaled(k, kind.clone(), nodes, mesh.h());
                let out = filter_field(&field, &kernel, BoundaryPolicy::PositionDependent, k + 1).unwrap();
                let worst = out.max_error(f);
                assert!(worst < 1e-10, "{}: {worst:e}", out.kernel);
            }
        }
    }
}

#[test]
fn even_data_gives_even_output() {
    let mesh = Mesh1D::unit(16).unwrap();
    for kind in families() {
        let k = 2;
        let field = DGField::project(mesh, k, |x| (2.0 * PI * x).cos() + 0.2 * (6.0 * PI * x).cos());
        for policy in [BoundaryPolicy::PeriodicWrap, BoundaryPolicy::PositionDependent] {
            let out = filter_field(&field, &scaled(k, kind.clone(), NodeKind::Standard, mesh.h()), policy, 3).unwrap();
            let m = out.u_star.len();
            for i in 0..m / 2 {
                assert!((out.x[i] + out.x[m - 1 - i] - 1.0).abs() < 1e-15);
                let d = (out.u_star[i] - out.u_star[m - 1 - i]).abs();
                assert!(d < 1e-12, "{} {policy:?} x={}: {d:e}", out.kernel, out.x[i]);
            }
        }
    }
}

#[test]
fn filtering_reduces_the_error() {
    let p = AdvectionProblem::one_d(1.0, Profile::unit_sine(), 0.5);
    for k in 1..=3 {
        let field = solve(&p, Mesh1D::unit(20).unwrap(), k, &TimeStepping::default()).unwrap();
        let exact = |x: f64| p.exact_1d(x, p.final_time);
        for nodes in [NodeKind::Standard, NodeKind::compact_default(k)] {
            let kernel = scaled(k, InitialBasisKind::Box, nodes, field.mesh().h());
            let out = filter_field(&field, &kernel, BoundaryPolicy::PeriodicWrap, k + 1).unwrap();
            assert!(out.l2_error(exact) < out.dg_l2_error(exact), "{}", out.kernel);
            let dg_max = out.x.iter().zip(&out.u_h).map(|(&x, u)| (exact(x) - u).abs()).fold(0.0, f64::max);
            assert!(out.max_error(exact) < dg_max, "{}", out.kernel);
        }
    }
}

#[test]
fn filtered_solution_is_nearly_continuous() {
    let p = AdvectionProblem::one_d(1.0, Profile::unit_sine(), 0.5);
    for k in 1..=3 {
        let field = solve(&p, Mesh1D::unit(20).unwrap(), k, &TimeStepping::default()).unwrap();
        for kind in [InitialBasisKind::Box, InitialBasisKind::RaisedCosine] {
            let kernel = scaled(k, kind, NodeKind::Standard, field.mesh().h());
            let jump = filtered_max_jump(&field, &kernel, BoundaryPolicy::PeriodicWrap).unwrap();
            assert!(jump < 1e-9 * field.max_jump(), "k={k}: {jump:e} vs {:e}", field.max_jump());
        }
    }
}

#[test]
fn axis_order_does_not_matter() {
    let mesh = Mesh2D::square(0.0, 1.0, 8).unwrap();
    let k = 2;
    let field = DGField2D::project(mesh, k, |x, y| (2.0 * PI * x).sin() * (2.0 * PI * y).cos() + x * y);
    let kx = scaled(k, InitialBasisKind::Box, NodeKind::Standard, mesh.x.h());
    let ky = scaled(k, InitialBasisKind::RaisedCosine, NodeKind::compact_default(k), mesh.y.h());
    let a = filter_field_2d_ordered(&field, &kx, &ky, BoundaryPolicy::PeriodicWrap, 3, AxisOrder::XThenY).unwrap();
    let b = filter_field_2d_ordered(&field, &kx, &ky, BoundaryPolicy::PeriodicWrap, 3, AxisOrder::YThenX).unwrap();
    assert_eq!(a.x, b.x);
    for (u, v) in a.u_star.iter().zip(&b.u_star) {
        assert!((u - v).abs() < 1e-13);
    }
}

#[test]
fn separable_data_filters_axis_by_axis() {
    let n = 8;
    let k = 1;
    let mesh2 = Mesh2D::square(0.0, 1.0, n).unwrap();
    let mesh1 = Mesh1D::unit(n).unwrap();
    let f = |x: f64| (2.0 * PI * x).sin() + 0.5;
    let g = |y: f64| (2.0 * PI * y).cos();
    let field2 = DGField2D::project(mesh2, k, |x, y| f(x) * g(y));
    let kernel = scaled(k, InitialBasisKind::Box, NodeKind::Standard, mesh1.h());
    let out2 = filter_field_2d(&field2, &kernel, &kernel, BoundaryPolicy::PeriodicWrap, 2).unwrap();
    let fx = DGField::project(mesh1, k, f);
    let gy = DGField::project(mesh1, k, g);
    for i in (0..out2.x.len()).step_by(7) {
        let (x, y) = (out2.x[i], out2.y[i]);
        let want = convolve_point(&fx, &kernel, x, BoundaryPolicy::PeriodicWrap).unwrap()
            * convolve_point(&gy, &kernel, y, BoundaryPolicy::PeriodicWrap).unwrap();
        assert!((out2.u_star[i] - want).abs() < 1e-13, "({x}, {y})");
    }
}

#[test]
fn two_dimensional_boundary_policy_is_rejected() {
    let mesh = Mesh2D::square(0.0, 1.0, 4).unwrap();
    let field = DGField2D::project(mesh, 1, |x, y| x + y);
    let kernel = scaled(1, InitialBasisKind::Box, NodeKind::Standard, 0.25);
    let err = filter_field_2d(&field, &kernel, &kernel, BoundaryPolicy::PositionDependent, 2).unwrap_err();
    assert!(matches!(err, PostError::Policy(_)));
}

#[test]
fn zero_points_per_element_is_rejected() {
    let field = DGField::project(Mesh1D::unit(4).unwrap(), 1, |x| x);
    let kernel = scaled(1, InitialBasisKind::Box, NodeKind::Standard, 0.25);
    assert!(filter_field(&field, &kernel, BoundaryPolicy::PeriodicWrap, 0).is_err());
}

#[test]
fn kernels_wider_than_the_domain_are_rejected() {
    let field = DGField::project(Mesh1D::unit(4).unwrap(), 2, |x| x);
    let kernel = scaled(2, InitialBasisKind::Box, NodeKind::Standard, 0.25);
    assert!(filter_field(&field, &kernel, BoundaryPolicy::PositionDependent, 3).is_err());
}

#[test]
fn divided_differences() {
    let h = 0.1;
    assert!((divided_difference_at(|x| x * x, 0.3, h, 2) - 2.0).abs() < 1e-12);
    assert!((divided_difference_at(|x| x.powi(3), 0.0, h, 3) - 6.0).abs() < 1e-11);
    let s = divided_difference_at(f64::sin, 0.4, h, 1);
    assert!((s - ((0.45f64).sin() - (0.35f64).sin()) / h).abs() < 1e-15);

    let n = 64;
    let dx = 1.0 / n as f64;
    let samples: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 * dx).sin()).collect();
    let d = divided_difference(&samples, dx, 2.0 * dx, 1).unwrap();
    for (i, v) in d.iter().enumerate() {
        let x = i as f64 * dx;
        let want = ((2.0 * PI * (x + dx)).sin() - (2.0 * PI * (x - dx)).sin()) / (2.0 * dx);
        assert!((v - want).abs() < 1e-12);
    }
    assert!(divided_difference(&samples, dx, 1.5 * dx, 1).is_err());
    assert!(divided_difference(&samples, dx, 2.0 * dx, 0).is_err());
}

#[test]
fn filtered_divided_differences_converge() {
    // ∂_h of the filtered field against the exact derivative difference
    let p = AdvectionProblem::one_d(1.0, Profile::unit_sine(), 0.0);
    let k = 2;
    let errors: Vec<f64> = [20, 40]
        .iter()
        .map(|&n| {
            let field = solve(&p, Mesh1D::unit(n).unwrap(), k, &TimeStepping::default()).unwrap();
            let h = field.mesh().h();
            let kernel = scaled(k, InitialBasisKind::Box, NodeKind::Standard, h);
            let xs: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * h).collect();
            xs.iter()
                .map(|&x| {
                    let d = divided_difference_at(
                        |t| {
                            convolve_point(&field, &kernel, field.mesh().wrap(t), BoundaryPolicy::PeriodicWrap).unwrap()
                        },
                        x,
                        h,
                        1,
                    );
                    let want = divided_difference_at(|t| (2.0 * PI * t).sin(), x, h, 1);
                    (d - want).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let order = (errors[0] / errors[1]).log2();
    assert!(order > 2.5, "order {order} from {errors:?}");
}

#[test]
fn pointwise_tags_follow_the_markers() {
    let mesh = Mesh1D::unit(20).unwrap();
    let k = 2;
    let field = DGField::project(mesh, k, |x| (2.0 * PI * x).sin());
    let kernel = scaled(k, InitialBasisKind::Box, NodeKind::Standard, mesh.h());
    let (left, right) = boundary_markers(&kernel, (0.0, 1.0));
    assert!((left - 0.175).abs() < 1e-15 && (right - 0.825).abs() < 1e-15);
    let xs = [0.0, 0.1, left - 1e-3, left + 1e-3, 0.5, right - 1e-3, right + 1e-3, 1.0];
    let samples =
        pointwise_samples(&field, &kernel, |x| (2.0 * PI * x).sin(), &xs, BoundaryPolicy::PositionDependent).unwrap();
    let shifted: Vec<bool> = samples.iter().map(|s| matches!(s.tag, PointTag::Shifted(_))).collect();
    assert_eq!(shifted, [true, true, true, false, false, false, true, true]);
    for s in &samples {
        assert!(s.err_star() < 1e-2 && s.err_h() < 1e-2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn filtering_is_linear(
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        k in 1usize..=3,
        periodic in any::<bool>(),
        phase in 0.0f64..6.0,
    ) {
        let mesh = Mesh1D::unit(12).unwrap();
        let u = DGField::project(mesh, k, |x| (2.0 * PI * x + phase).sin());
        let v = DGField::project(mesh, k, |x| (4.0 * PI * x).cos() + x);
        let w = u.combine(a, &v, b).unwrap();
        let policy = if periodic { BoundaryPolicy::PeriodicWrap } else { BoundaryPolicy::PositionDependent };
        let kernel = scaled(k, InitialBasisKind::Box, NodeKind::compact_default(k), mesh.h());
        let fu = filter_field(&u, &kernel, policy, k + 1).unwrap();
        let fv = filter_field(&v, &kernel, policy, k + 1).unwrap();
        let fw = filter_field(&w, &kernel, policy, k + 1).unwrap();
        let scale = fu.u_star.iter().chain(&fv.u_star).map(|x| x.abs()).fold(1.0, f64::max) * (a.abs() + b.abs()).max(1.0);
        for i in 0..fw.u_star.len() {
            let d = (fw.u_star[i] - (a * fu.u_star[i] + b * fv.u_star[i])).abs();
            prop_assert!(d <= 1e-13 * scale, "i={} {:e}", i, d);
        }
    }
}
