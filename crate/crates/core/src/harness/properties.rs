//! Self-contained invariant checks on kernels, basis functions, the DG
//! solver and the filter.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basisfn::{basis, rational_to_f64, InitialBasisKind};
use crate::dgsolver::{advance, AdvectionProblem, DGField, Mesh1D, TimeStepping};
use crate::filtercore::{
    build_filter, exact_moment_matrix, reproduction_residual, solve_coefficients_exact, solve_extended_dd,
    split_rational, FilterConfig, FilterKernel, KernelBasis, NodeKind,
};
use crate::postproc::{divided_difference_at, filter_field, BoundaryPolicy};

use super::checks::Check;

pub const REPRODUCTION_TOL: f64 = 1e-10;
pub const INTEGRAL_TOL: f64 = 1e-14;
pub const DUAL_ORACLE_TOL: f64 = 1e-12;
pub const CLOSED_FORM_TOL: f64 = 1e-14;
pub const IDENTITY_TOL: f64 = 1e-10;
pub const INVARIANT_TOL: f64 = 1e-13;

fn kinds(k: usize) -> Vec<NodeKind> {
    vec![NodeKind::Standard, NodeKind::compact_default(k), NodeKind::Compact { epsilon: 0.5 }]
}

fn describe(kernel: &FilterKernel) -> String {
    let nodes = kernel.nodes().kind();
    match nodes.epsilon() {
        Some(e) => format!("{} k={} {} eps={e}", kernel.basis().kind().name(), kernel.k(), nodes.name()),
        None => format!("{} k={} {}", kernel.basis().kind().name(), kernel.k(), nodes.name()),
    }
}

/// Reproduction of `x^m` for `m <= 2k` at `xs` and the unit integral,
/// named after the kernel.
pub fn kernel_checks(kernel: &FilterKernel, xs: &[f64]) -> Vec<Check> {
    let name = describe(kernel);
    let worst = (0..=2 * kernel.k() as u32)
        .map(|m| (m, reproduction_residual(kernel, m, xs)))
        .fold((0, 0.0), |a, b| if b.1 > a.1 || b.1.is_nan() { b } else { a });
    let integral = kernel.integral();
    vec![
        Check::new(
            format!("reproduction_residual {name}"),
            worst.1 < REPRODUCTION_TOL,
            format!("max residual {:.3e} at m={} (bound {REPRODUCTION_TOL:e})", worst.1, worst.0),
        ),
        Check::new(
            format!("unit integral {name}"),
            (integral - 1.0).abs() <= INTEGRAL_TOL,
            format!("|integral - 1| = {:.3e}", (integral - 1.0).abs()),
        ),
    ]
}

fn support_checks(kernel: &FilterKernel) -> Check {
    let k = kernel.k() as f64;
    let want = match kernel.nodes().kind() {
        NodeKind::Compact { epsilon } => (2.0 * epsilon + 1.0) * k + 1.0,
        _ => 3.0 * k + 1.0,
    };
    let got = kernel.support_width();
    Check::new(
        format!("support width {}", describe(kernel)),
        (got - want).abs() <= 4.0 * f64::EPSILON * want,
        format!("{got} vs {want}"),
    )
}

fn dual_oracle(k: usize, nodes: NodeKind) -> Check {
    let name = format!("dual oracle box k={k} {}", nodes.name());
    let run = || -> Result<f64, String> {
        let basis = KernelBasis::new(&InitialBasisKind::Box, k + 1).map_err(|e| e.to_string())?;
        let dist = crate::filtercore::make_nodes(k, nodes.clone(), 0.0).map_err(|e| e.to_string())?;
        let exact = solve_coefficients_exact(&basis, &dist).ok_or("rational system singular")?;
        // the same exact moments, rounded to double-double and eliminated with pivoting
        let m: Vec<Vec<_>> = exact_moment_matrix(&basis, &dist)
            .ok_or("no exact moments")?
            .iter()
            .map(|row| row.iter().map(split_rational).collect())
            .collect();
        let mut rhs = vec![0.0; m.len()];
        rhs[0] = 1.0;
        let (approx, _) = solve_extended_dd(&m, &rhs).map_err(|e| e.to_string())?;
        let scale = exact.iter().map(|c| rational_to_f64(c).abs()).fold(1.0, f64::max);
        Ok(exact.iter().zip(&approx).map(|(e, a)| (rational_to_f64(e) - a.to_f64()).abs()).fold(0.0, f64::max) / scale)
    };
    match run() {
        Ok(d) => Check::new(name, d <= DUAL_ORACLE_TOL, format!("relative difference {d:.3e}")),
        Err(e) => Check::new(name, false, e),
    }
}

/// Central B-splines of orders 2 to 4 and raised-cosine functions of
/// orders 2 to 4, written out piece by piece.
pub fn closed_form(kind: &InitialBasisKind, order: usize, x: f64) -> f64 {
    let a = x.abs();
    match (kind, order) {
        (InitialBasisKind::Box, 2) => (1.0 - a).max(0.0),
        (InitialBasisKind::Box, 3) => {
            if a < 0.5 {
                0.25 * (3.0 - 4.0 * x * x)
            } else if a <= 1.5 {
                0.125 * (2.0 * a - 3.0).powi(2)
            } else {
                0.0
            }
        }
        (InitialBasisKind::Box, 4) => {
            if a < 1.0 {
                (3.0 * a.powi(3) - 6.0 * a * a + 4.0) / 6.0
            } else if a <= 2.0 {
                (2.0 - a).powi(3) / 6.0
            } else {
                0.0
            }
        }
        (InitialBasisKind::RaisedCosine, 2) => {
            if a <= 1.0 {
                0.5 * (1.0 - a) + (2.0 * PI * a).sin() / (4.0 * PI)
            } else {
                0.0
            }
        }
        (InitialBasisKind::RaisedCosine, 3) => {
            let c = 1.0 + (2.0 * PI * x).cos();
            if a < 0.5 {
                0.125 * (3.0 - 4.0 * x * x) + c / (4.0 * PI * PI)
            } else if a <= 1.5 {
                (2.0 * a - 3.0).powi(2) / 16.0 - c / (8.0 * PI * PI)
            } else {
                0.0
            }
        }
        (InitialBasisKind::RaisedCosine, 4) => {
            let s = (2.0 * PI * a).sin();
            let p = 16.0 * PI.powi(3);
            if a < 1.0 {
                (3.0 * a.powi(3) - 6.0 * a * a + 4.0) / 12.0 + (2.0 * PI * (2.0 - 3.0 * a) + 3.0 * s) / p
            } else if a <= 2.0 {
                (2.0 - a).powi(3) / 12.0 + (2.0 * PI * (a - 2.0) - s) / p
            } else {
                0.0
            }
        }
        _ => f64::NAN,
    }
}

fn closed_form_checks(xs: &[f64]) -> Vec<Check> {
    let mut out = Vec::new();
    for kind in [InitialBasisKind::Box, InitialBasisKind::RaisedCosine] {
        for order in 2..=4 {
            let f = basis(&kind, order).expect("closed-form family");
            let diff = xs.iter().map(|&x| (f.evaluate(x) - closed_form(&kind, order, x)).abs()).fold(0.0, f64::max);
            out.push(Check::new(
                format!("closed form {} order {order}", kind.name()),
                diff <= CLOSED_FORM_TOL,
                format!("max difference {diff:.3e}"),
            ));
        }
    }
    out
}

/// `D φ^(ℓ)(x) = φ^(ℓ-1)(x + 1/2) - φ^(ℓ-1)(x - 1/2)`.
fn derivative_identity(xs: &[f64]) -> Vec<Check> {
    let mut out = Vec::new();
    for kind in [InitialBasisKind::Box, InitialBasisKind::RaisedCosine] {
        for order in 2..=5 {
            let f = basis(&kind, order).expect("closed-form family");
            let g = basis(&kind, order - 1).expect("closed-form family");
            let d = f.derivative();
            let diff = xs
                .iter()
                .filter(|&&x| f.breakpoints().iter().all(|b| (x - b).abs() > 1e-9))
                .map(|&x| (d.evaluate(x) - (g.evaluate(x + 0.5) - g.evaluate(x - 0.5))).abs())
                .fold(0.0, f64::max);
            out.push(Check::new(
                format!("derivative identity {} order {order}", kind.name()),
                diff <= IDENTITY_TOL,
                format!("max difference {diff:.3e}"),
            ));
        }
    }
    out
}

/// `D(K_h ⋆ v) = K̃_h ⋆ ∂_h v`, `K̃` using the same coefficients on the
/// basis one order lower.
fn convolution_identity(xs: &[f64]) -> Vec<Check> {
    let h = 0.1;
    let v = |x: f64| (2.0 * PI * x).sin() + 0.3 * (5.0 * x).cos();
    let dv = |x: f64| 2.0 * PI * (2.0 * PI * x).cos() - 1.5 * (5.0 * x).sin();
    let mut out = Vec::new();
    for kind in [InitialBasisKind::Box, InitialBasisKind::RaisedCosine] {
        for k in 1..=3 {
            for nodes in [NodeKind::Standard, NodeKind::compact_default(k)] {
                let kernel = build_filter(&FilterConfig::new(k, kind.clone(), nodes).with_scaling(h)).expect("kernel");
                let lower = Arc::new(KernelBasis::new(&kind, k).expect("basis"));
                let reduced =
                    FilterKernel::from_parts(lower, kernel.nodes().clone(), kernel.coefficients().to_vec(), h)
                        .expect("kernel");
                let t_full = kernel.quadrature_table(24, 1);
                let t_low = reduced.quadrature_table(24, 1);
                let diff = xs
                    .iter()
                    .map(|&x| {
                        let lhs: f64 = t_full.iter().map(|&(t, w)| w * dv(x - t)).sum();
                        let rhs: f64 = t_low.iter().map(|&(t, w)| w * divided_difference_at(v, x - t, h, 1)).sum();
                        (lhs - rhs).abs()
                    })
                    .fold(0.0, f64::max);
                out.push(Check::new(
                    format!("divided-difference identity {}", describe(&kernel)),
                    diff <= IDENTITY_TOL,
                    format!("max difference {diff:.3e}"),
                ));
            }
        }
    }
    out
}

fn filter_invariants(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();
    let mesh = Mesh1D::unit(20).expect("mesh");
    for (kind, k) in [InitialBasisKind::Box, InitialBasisKind::RaisedCosine, InitialBasisKind::Bump]
        .into_iter()
        .flat_map(|kind| (1..=3).map(move |k| (kind.clone(), k)))
    {
        for nodes in [NodeKind::Standard, NodeKind::compact_default(k)] {
            let kernel =
                build_filter(&FilterConfig::new(k, kind.clone(), nodes).with_scaling(mesh.h())).expect("kernel");
            let name = describe(&kernel);
            for policy in [BoundaryPolicy::PeriodicWrap, BoundaryPolicy::PositionDependent] {
                let c = DGField::project(mesh, k, |_| 1.0);
                let dev = filter_field(&c, &kernel, policy, k + 3)
                    .map(|f| f.u_star.iter().map(|u| (u - 1.0).abs()).fold(0.0, f64::max))
                    .unwrap_or(f64::NAN);
                out.push(Check::new(
                    format!("constant preservation {name} {policy:?}"),
                    dev <= INVARIANT_TOL,
                    format!("max deviation {dev:.3e}"),
                ));
            }
            let (a, b): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let f = DGField::project(mesh, k, |x| (2.0 * PI * x).sin() + x * x);
            let g = DGField::project(mesh, k, |x| (6.0 * x).cos());
            let fg = f.combine(a, &g, b).expect("same shape");
            let p = BoundaryPolicy::PositionDependent;
            let scale = match filter_field(&fg, &kernel, p, 4) {
                Ok(h) => h.u_star.iter().map(|u| u.abs()).fold(1.0, f64::max),
                Err(_) => 1.0,
            };
            let diff = match (
                filter_field(&f, &kernel, p, 4),
                filter_field(&g, &kernel, p, 4),
                filter_field(&fg, &kernel, p, 4),
            ) {
                (Ok(ff), Ok(gg), Ok(ffgg)) => {
                    (0..ff.u_star.len())
                        .map(|i| (ffgg.u_star[i] - (a * ff.u_star[i] + b * gg.u_star[i])).abs())
                        .fold(0.0, f64::max)
                        / scale
                }
                _ => f64::NAN,
            };
            out.push(Check::new(
                format!("linearity {name}"),
                diff <= INVARIANT_TOL,
                format!("max relative difference {diff:.3e}"),
            ));
        }
    }
    out
}

fn mass_conservation() -> Vec<Check> {
    let mut out = Vec::new();
    for (k, speed) in [(1, 1.0), (2, -0.7), (3, 1.0)] {
        let problem = AdvectionProblem::one_d(speed, crate::dgsolver::Profile::unit_sine(), 0.3);
        let mut field = DGField::project(Mesh1D::unit(16).expect("mesh"), k, |x| 1.0 + problem.exact_1d(x, 0.0));
        let before = field.mass();
        let drift = match advance(&mut field, speed, problem.final_time, &TimeStepping::default()) {
            Ok(()) => (field.mass() - before).abs() / before.abs(),
            Err(_) => f64::NAN,
        };
        out.push(Check::new(
            format!("mass conservation k={k} speed={speed}"),
            drift <= INVARIANT_TOL,
            format!("relative mass drift {drift:.3e}"),
        ));
    }
    out
}

/// Every property check, with sample points drawn from `seed`.
pub fn property_suite(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let wide: Vec<f64> = (0..100).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let mut out = Vec::new();
    for kind in [InitialBasisKind::Box, InitialBasisKind::RaisedCosine, InitialBasisKind::Bump] {
        for k in 1..=3 {
            for nodes in kinds(k) {
                match build_filter(&FilterConfig::new(k, kind.clone(), nodes.clone())) {
                    Ok(kernel) => {
                        out.extend(kernel_checks(&kernel, &unit));
                        out.push(support_checks(&kernel));
                    }
                    Err(e) => out.push(Check::new(
                        format!("build {} k={k} {}", kind.name(), nodes.name()),
                        false,
                        e.to_string(),
                    )),
                }
            }
        }
    }
    for k in 1..=4 {
        out.push(dual_oracle(k, NodeKind::Standard));
        out.push(dual_oracle(k, NodeKind::compact_default(k)));
    }
    out.extend(closed_form_checks(&wide));
    out.extend(derivative_identity(&wide));
    out.extend(convolution_identity(&unit[..8]));
    out.extend(filter_invariants(&mut rng));
    out.extend(mass_conservation());
    out
}
