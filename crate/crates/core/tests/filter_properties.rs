use std::sync::Arc;

use num::{BigInt, BigRational};
use proptest::prelude::*;

use siac::basisfn::{rational_to_f64, InitialBasisKind};
use siac::filtercore::{
    boundary_shift_for, build_filter, exact_moment_matrix, export_kernel, import_kernel, make_nodes, moment_matrix,
    reproduction_residual, solve_coefficients_exact, solve_extended_dd, split_rational, tensor2d, FilterConfig,
    FilterError, FilterKernel, KernelBasis, NodeKind,
};
use siac::postproc::divided_difference_at;
use siac::quadrature::GaussLegendre;

fn kernel(k: usize, kind: InitialBasisKind, nodes: NodeKind) -> FilterKernel {
    build_filter(&FilterConfig::new(k, kind, nodes)).unwrap()
}

fn all_kernels() -> Vec<FilterKernel> {
    let mut out = Vec::new();
    for kind in [InitialBasisKind::Box, InitialBasisKind::RaisedCosine, InitialBasisKind::Bump] {
        for k in 1..=3 {
            for nodes in [NodeKind::Standard, NodeKind::compact_default(k)] {
                out.push(kernel(k, kind.clone(), nodes));
            }
        }
    }
    out
}

/// Relative tolerance for symmetry checks. Only the B-spline moments are
/// exact; the others carry binary64 or quadrature error through the solve.
fn symmetry_tol(kern: &FilterKernel) -> f64 {
    if matches!(kern.basis(), KernelBasis::BSpline { .. }) {
        1e-13
    } else {
        1e-10
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn node_layouts() {
    assert_eq!(make_nodes(2, NodeKind::Standard, 0.0).unwrap().nodes(), &[-2.0, -1.0, 0.0, 1.0, 2.0]);
    assert_eq!(make_nodes(2, NodeKind::compact_default(2), 0.0).unwrap().nodes(), &[-0.5, -0.25, 0.0, 0.25, 0.5]);
    assert_eq!(make_nodes(1, NodeKind::Standard, 0.5).unwrap().nodes(), &[-0.5, 0.5, 1.5]);
    assert_eq!(NodeKind::compact_default(3), NodeKind::Compact { epsilon: 1.0 / 6.0 });
}

#[test]
fn invalid_node_requests() {
    assert_eq!(make_nodes(0, NodeKind::Standard, 0.0).unwrap_err(), FilterError::InvalidDegree(0));
    for eps in [0.0, -0.5, 1.5, f64::NAN] {
        assert!(matches!(make_nodes(2, NodeKind::Compact { epsilon: eps }, 0.0), Err(FilterError::InvalidEpsilon(_))));
    }
    assert!(make_nodes(1, NodeKind::Custom(vec![0.0, 1.0]), 0.0).is_err());
    assert!(make_nodes(1, NodeKind::Custom(vec![0.0, 0.0, 1.0]), 0.0).is_err());
    assert!(make_nodes(1, NodeKind::Custom(vec![-1.0, 0.5, 1.0]), 0.0).is_ok());
}

#[test]
fn moment_rows_match_quadrature() {
    let rule = GaussLegendre::new(20);
    for kind in [InitialBasisKind::Box, InitialBasisKind::RaisedCosine] {
        let basis = KernelBasis::new(&kind, 3).unwrap();
        let nodes = make_nodes(2, NodeKind::Standard, 0.0).unwrap();
        let m = moment_matrix(&basis, &nodes).unwrap();
        let f = basis.function().unwrap();
        for (j, row) in m.iter().enumerate() {
            for (g, &x) in nodes.nodes().iter().enumerate() {
                let quad: f64 = f
                    .breakpoints()
                    .windows(2)
                    .map(|w| rule.integrate(w[0], w[1], |t| f.evaluate(t) * (t + x).powi(j as i32)))
                    .sum();
                assert!(close(row[g], quad, 1e-13 * quad.abs().max(1.0)), "{kind:?} j={j} x={x}");
            }
        }
    }
}

/// Three-node system for the hat basis: `c_0 + 2c = 1`, `2c ε² + 1/6 = 0`.
fn hat_coefficients(epsilon: f64) -> [f64; 3] {
    let c = -1.0 / (12.0 * epsilon * epsilon);
    [c, 1.0 - 2.0 * c, c]
}

#[test]
fn first_degree_coefficients() {
    for (nodes, eps) in [(NodeKind::Standard, 1.0), (NodeKind::compact_default(1), 0.5)] {
        let got = kernel(1, InitialBasisKind::Box, nodes).coefficients().to_vec();
        let want = hat_coefficients(eps);
        for (g, w) in got.iter().zip(want) {
            assert!(close(*g, w, 1e-15), "{got:?} vs {want:?}");
        }
    }
    let std = kernel(1, InitialBasisKind::Box, NodeKind::Standard);
    assert!(close(std.coefficients()[0], -1.0 / 12.0, 1e-16));
    assert!(close(std.coefficients()[1], 7.0 / 6.0, 1e-15));
}

#[test]
fn coefficients_are_symmetric() {
    for k in all_kernels() {
        let c = k.coefficients();
        let n = c.len();
        for i in 0..n / 2 {
            assert!(close(c[i], c[n - 1 - i], symmetry_tol(&k) * c[i].abs().max(1.0)), "{:?} {c:?}", k.basis().kind());
        }
    }
}

#[test]
fn support_widths_and_zero_outside() {
    let cases =
        [(2, NodeKind::Standard, 7.0), (3, NodeKind::compact_default(3), 5.0), (2, NodeKind::compact_default(2), 4.0)];
    for (k, nodes, width) in cases {
        let kern = kernel(k, InitialBasisKind::Box, nodes);
        assert_eq!(kern.support_width(), width);
        let (lo, hi) = kern.support();
        for d in [1e-9, 0.1, 3.0] {
            assert_eq!(kern.evaluate(lo - d), 0.0);
            assert_eq!(kern.evaluate(hi + d), 0.0);
        }
    }
}

#[test]
fn unit_integral_and_even_kernels() {
    for kern in all_kernels() {
        assert!(close(kern.integral(), 1.0, 1e-14), "integral {}", kern.integral());
        let (_, hi) = kern.support();
        for i in 1..40 {
            let y = hi * i as f64 / 40.0;
            let (a, b) = (kern.evaluate(y), kern.evaluate(-y));
            assert!(
                close(a, b, symmetry_tol(&kern) * a.abs().max(1.0)),
                "{:?} K({y}) = {a}, K(-{y}) = {b}",
                kern.basis().kind()
            );
        }
    }
}

#[test]
fn rational_and_extended_solves_agree() {
    for k in 1..=4 {
        for nodes in [NodeKind::Standard, NodeKind::compact_default(k)] {
            let basis = KernelBasis::new(&InitialBasisKind::Box, k + 1).unwrap();
            let dist = make_nodes(k, nodes.clone(), 0.0).unwrap();
            let exact = solve_coefficients_exact(&basis, &dist).unwrap();
            let matrix: Vec<Vec<_>> = exact_moment_matrix(&basis, &dist)
                .unwrap()
                .iter()
                .map(|row| row.iter().map(split_rational).collect())
                .collect();
            let mut rhs = vec![0.0; 2 * k + 1];
            rhs[0] = 1.0;
            let (extended, _) = solve_extended_dd(&matrix, &rhs).unwrap();
            for (e, d) in exact.iter().zip(&extended) {
                let e = rational_to_f64(e);
                assert!(close(e, d.to_f64(), 1e-12 * e.abs().max(1.0)), "k={k} {nodes:?}: {e} vs {}", d.to_f64());
            }
            // the built kernel carries the rounded rational solution
            let built = kernel(k, InitialBasisKind::Box, nodes);
            for (e, c) in exact.iter().zip(built.coefficients()) {
                assert_eq!(rational_to_f64(e), *c);
            }
        }
    }
}

#[test]
fn exact_solution_satisfies_the_moment_system() {
    let basis = KernelBasis::new(&InitialBasisKind::Box, 3).unwrap();
    let dist = make_nodes(2, NodeKind::Standard, 0.0).unwrap();
    let c = solve_coefficients_exact(&basis, &dist).unwrap();
    let m = exact_moment_matrix(&basis, &dist).unwrap();
    for (j, row) in m.iter().enumerate() {
        let s: BigRational = row.iter().zip(&c).map(|(a, b)| a * b).sum();
        let want = BigRational::from_integer(BigInt::from((j == 0) as i32));
        assert_eq!(s, want, "row {j}");
    }
}

#[test]
fn derivative_commutes_with_divided_difference() {
    let h = 0.1;
    let v = |x: f64| (2.0 * std::f64::consts::PI * x).sin() + 0.3 * (5.0 * x).cos();
    let dv = |x: f64| 2.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * x).cos() - 1.5 * (5.0 * x).sin();
    for kind in [InitialBasisKind::Box, InitialBasisKind::RaisedCosine] {
        for k in 1..=3 {
            let full = build_filter(&FilterConfig::new(k, kind.clone(), NodeKind::Standard).with_scaling(h)).unwrap();
            let lower = Arc::new(KernelBasis::new(&kind, k).unwrap());
            let reduced =
                FilterKernel::from_parts(lower, full.nodes().clone(), full.coefficients().to_vec(), h).unwrap();
            let tf = full.quadrature_table(24, 1);
            let tl = reduced.quadrature_table(24, 1);
            for x in [0.0, 0.13, 0.71] {
                let lhs: f64 = tf.iter().map(|&(t, w)| w * dv(x - t)).sum();
                let rhs: f64 = tl.iter().map(|&(t, w)| w * divided_difference_at(v, x - t, h, 1)).sum();
                assert!(close(lhs, rhs, 1e-10), "{kind:?} k={k} x={x}: {lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn boundary_shifts() {
    let domain = (0.0, 1.0);
    let h = 0.05;
    for k in 1..=3 {
        // interior points keep the symmetric kernel
        assert_eq!(boundary_shift_for(k, &NodeKind::Standard, 0.5, domain, h).unwrap(), 0.0);
        let half_width = (3 * k + 1) as f64 / 2.0;
        let left = boundary_shift_for(k, &NodeKind::Standard, 0.0, domain, h).unwrap();
        assert!(close(left, -half_width, 1e-12), "k={k}: {left}");
        let right = boundary_shift_for(k, &NodeKind::Standard, 1.0, domain, h).unwrap();
        assert!(close(right, half_width, 1e-12), "k={k}: {right}");
        let compact = boundary_shift_for(k, &NodeKind::compact_default(k), 0.0, domain, h).unwrap();
        assert!(close(compact, -((k + 2) as f64) / 2.0, 1e-12), "k={k}: {compact}");
    }
    assert!(matches!(
        boundary_shift_for(2, &NodeKind::Standard, 1.5, domain, 0.05),
        Err(FilterError::OutsideDomain { .. })
    ));
    assert!(matches!(
        boundary_shift_for(2, &NodeKind::Standard, 0.5, domain, 0.5),
        Err(FilterError::DomainTooShort { .. })
    ));
}

#[test]
fn shifted_kernels_still_reproduce_polynomials() {
    let base = kernel(2, InitialBasisKind::Box, NodeKind::Standard);
    let shifted = base.shifted(-3.5).unwrap();
    assert_eq!(shifted.nodes().shift(), -3.5);
    let xs = [-0.4, 0.0, 0.9];
    for m in 0..=4 {
        assert!(reproduction_residual(&shifted, m, &xs) < 1e-10, "m={m}");
    }
    assert!(close(shifted.integral(), 1.0, 1e-14));
}

#[test]
fn tensor_footprints() {
    let h = 0.05;
    let std2 = build_filter(&FilterConfig::new(3, InitialBasisKind::Box, NodeKind::Standard).with_scaling(h)).unwrap();
    let t = tensor2d(std2.clone(), std2);
    assert!(close(t.footprint(), (10.0 * h).powi(2), 1e-15));
    let c = build_filter(&FilterConfig::new(3, InitialBasisKind::Box, NodeKind::compact_default(3)).with_scaling(h))
        .unwrap();
    let t = tensor2d(c.clone(), c.clone());
    assert!(close(t.footprint(), (5.0 * h).powi(2), 1e-15));
    assert!(close(t.evaluate(0.01, -0.02), c.evaluate(0.01) * c.evaluate(-0.02), 1e-12));
}

#[test]
fn export_round_trip_is_bit_identical() {
    for kern in all_kernels() {
        let json = export_kernel(&kern).unwrap();
        let back = import_kernel(&json).unwrap();
        assert_eq!(back.coefficients(), kern.coefficients());
        assert_eq!(back.corrections(), kern.corrections());
        assert_eq!(back.nodes(), kern.nodes());
        for i in 0..25 {
            let y = -3.0 + 0.25 * i as f64;
            assert_eq!(back.evaluate(y).to_bits(), kern.evaluate(y).to_bits());
        }
    }
    assert!(import_kernel("{}").is_err());
}

#[test]
fn ill_conditioned_systems_are_reported() {
    let err = build_filter(&FilterConfig::new(8, InitialBasisKind::RaisedCosine, NodeKind::Compact { epsilon: 1e-3 }))
        .unwrap_err();
    assert!(matches!(err, FilterError::IllConditioned { .. }), "{err:?}");
    assert!(err.to_string().contains("ill-conditioned"));
}

#[test]
fn invalid_scaling_is_rejected() {
    for s in [0.0, -1.0, f64::INFINITY] {
        let err = build_filter(&FilterConfig::new(1, InitialBasisKind::Box, NodeKind::Standard).with_scaling(s));
        assert!(matches!(err, Err(FilterError::InvalidScaling(_))));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernels_reproduce_low_degree_polynomials(idx in 0usize..18, x in -2.0f64..2.0) {
        thread_local! {
            static KERNELS: Vec<FilterKernel> = all_kernels();
        }
        KERNELS.with(|ks| {
            let kern = &ks[idx];
            for m in 0..=(2 * kern.k()) as u32 {
                let r = reproduction_residual(kern, m, &[x]);
                prop_assert!(r <= 1e-10 * x.abs().max(1.0).powi(m as i32), "m={} residual {}", m, r);
            }
            Ok(())
        })?;
    }

    #[test]
    fn scaling_is_a_change_of_variables(k in 1usize..=3, h in 0.01f64..1.0, y in -6.0f64..6.0, rc in any::<bool>()) {
        let kind = if rc { InitialBasisKind::RaisedCosine } else { InitialBasisKind::Box };
        let unit = build_filter(&FilterConfig::new(k, kind.clone(), NodeKind::Standard)).unwrap();
        let scaled = unit.with_scaling(h).unwrap();
        let a = scaled.evaluate(y * h);
        let b = unit.evaluate(y) / h;
        prop_assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0 / h), "{} vs {}", a, b);
    }

    #[test]
    fn any_node_shift_reproduces_polynomials(k in 1usize..=3, shift in -4.0f64..4.0, x in -1.0f64..1.0) {
        let moved = kernel(k, InitialBasisKind::Box, NodeKind::Standard).shifted(shift).unwrap();
        for m in 0..=(2 * k) as u32 {
            let r = reproduction_residual(&moved, m, &[x]);
            prop_assert!(r <= 1e-9, "m={} residual {}", m, r);
        }
    }
}
