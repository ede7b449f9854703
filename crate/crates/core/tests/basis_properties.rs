use std::f64::consts::PI;

use num::{BigInt, BigRational, One, Signed, Zero};
use proptest::prelude::*;

use siac::basisfn::{
    basis, convolve_with_box, f64_to_rational, raised_cosine, unit_box, ExactSpline, InitialBasisKind,
    PiecewiseFunction,
};
use siac::quadrature::GaussLegendre;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Central B-splines of orders 2 to 4, written out by hand.
fn bspline_formula(order: usize, x: &BigRational) -> BigRational {
    let a = x.abs();
    let zero = BigRational::zero();
    match order {
        2 if a < BigRational::one() => BigRational::one() - a,
        3 if a < q(1, 2) => q(3, 4) - x * x,
        3 if a < q(3, 2) => {
            let t = q(3, 2) - a;
            &t * &t / q(2, 1)
        }
        4 if a < BigRational::one() => q(2, 3) - x * x + &a * &a * &a / q(2, 1),
        4 if a < q(2, 1) => {
            let t = q(2, 1) - a;
            &t * &t * &t / q(6, 1)
        }
        2..=4 => zero,
        _ => unreachable!(),
    }
}

/// Raised-cosine basis functions of orders 2 to 4, written out by hand.
fn raised_cosine_formula(order: usize, x: f64) -> f64 {
    let s = (2.0 * PI * x).sin();
    let c = (2.0 * PI * x).cos();
    match order {
        2 => match x {
            x if (-1.0..0.0).contains(&x) => 0.5 * (1.0 + x) - s / (4.0 * PI),
            x if (0.0..=1.0).contains(&x) => 0.5 * (1.0 - x) + s / (4.0 * PI),
            _ => 0.0,
        },
        3 => match x {
            x if (-1.5..-0.5).contains(&x) => (2.0 * x + 3.0).powi(2) / 16.0 - (1.0 + c) / (8.0 * PI * PI),
            x if (-0.5..0.5).contains(&x) => (3.0 - 4.0 * x * x) / 8.0 + (1.0 + c) / (4.0 * PI * PI),
            x if (0.5..=1.5).contains(&x) => (2.0 * x - 3.0).powi(2) / 16.0 - (1.0 + c) / (8.0 * PI * PI),
            _ => 0.0,
        },
        4 => {
            let p3 = 16.0 * PI.powi(3);
            match x {
                x if (-2.0..-1.0).contains(&x) => (x + 2.0).powi(3) / 12.0 + (-2.0 * PI * (x + 2.0) + s) / p3,
                x if (-1.0..0.0).contains(&x) => {
                    (-3.0 * x.powi(3) - 6.0 * x * x + 4.0) / 12.0 + (2.0 * PI * (3.0 * x + 2.0) - 3.0 * s) / p3
                }
                x if (0.0..1.0).contains(&x) => {
                    (3.0 * x.powi(3) - 6.0 * x * x + 4.0) / 12.0 + (2.0 * PI * (2.0 - 3.0 * x) + 3.0 * s) / p3
                }
                x if (1.0..=2.0).contains(&x) => (2.0 - x).powi(3) / 12.0 + (2.0 * PI * (x - 2.0) - s) / p3,
                _ => 0.0,
            }
        }
        _ => unreachable!(),
    }
}

fn integral_by_quadrature(f: &PiecewiseFunction) -> f64 {
    let rule = GaussLegendre::new(20);
    f.breakpoints().windows(2).map(|w| rule.integrate(w[0], w[1], |x| f.evaluate(x))).sum()
}

fn away_from(f: &PiecewiseFunction, x: f64, gap: f64) -> bool {
    f.breakpoints().iter().all(|b| (x - b).abs() > gap)
}

#[test]
fn unit_box_values() {
    let b = unit_box();
    assert_eq!(b.evaluate(0.0), 1.0);
    assert_eq!(b.evaluate(0.75), 0.0);
    assert_eq!(b.integral(), 1.0);
}

#[test]
fn box_convolutions_at_the_origin() {
    let psi2 = convolve_with_box(&unit_box());
    assert_eq!(psi2.evaluate(0.0), 1.0);
    let psi3 = convolve_with_box(&psi2);
    assert!((psi3.evaluate(0.0) - 0.75).abs() < 1e-15);
    let rc2 = convolve_with_box(&raised_cosine());
    assert!((rc2.evaluate(0.5) - 0.25).abs() < 1e-15);
}

#[test]
fn higher_order_values() {
    let psi4 = basis(&InitialBasisKind::Box, 4).unwrap();
    assert!((psi4.evaluate(0.0) - 2.0 / 3.0).abs() < 1e-15);
    let rc3 = basis(&InitialBasisKind::RaisedCosine, 3).unwrap();
    assert!((rc3.evaluate(0.0) - (0.375 + 1.0 / (2.0 * PI * PI))).abs() < 1e-15);
}

#[test]
fn support_endpoints_and_outside() {
    let psi2 = basis(&InitialBasisKind::Box, 2).unwrap();
    let psi3 = basis(&InitialBasisKind::Box, 3).unwrap();
    let psi4 = basis(&InitialBasisKind::Box, 4).unwrap();
    assert_eq!(psi3.evaluate(1.5), 0.0);
    assert_eq!(psi2.evaluate(-0.5), 0.5);
    assert_eq!(psi4.evaluate(2.1), 0.0);
}

#[test]
fn order_zero_is_rejected() {
    assert!(basis(&InitialBasisKind::Box, 0).is_err());
    assert!(basis(&InitialBasisKind::Bump, 2).is_err());
}

#[test]
fn hat_moments_match_quadrature() {
    let psi2 = basis(&InitialBasisKind::Box, 2).unwrap();
    let rule = GaussLegendre::new(10);
    for (j, want) in [(0u32, 1.0), (1, 0.0), (2, 1.0 / 6.0)] {
        let quad = rule.integrate(-1.0, 0.0, |x| psi2.evaluate(x) * x.powi(j as i32))
            + rule.integrate(0.0, 1.0, |x| psi2.evaluate(x) * x.powi(j as i32));
        assert!((psi2.moment(j, 0.0) - quad).abs() < 1e-15, "j={j}");
        assert!((psi2.moment(j, 0.0) - want).abs() < 1e-15, "j={j}");
    }
}

#[test]
fn shifted_moments_match_quadrature() {
    let rc = basis(&InitialBasisKind::RaisedCosine, 3).unwrap();
    let rule = GaussLegendre::new(20);
    for &shift in &[-1.25, 0.0, 2.5] {
        for j in 0..6u32 {
            let quad: f64 = rc
                .breakpoints()
                .windows(2)
                .map(|w| rule.integrate(w[0], w[1], |t| rc.evaluate(t) * (t + shift).powi(j as i32)))
                .sum();
            let m = rc.moment(j, shift);
            assert!((m - quad).abs() < 1e-13 * quad.abs().max(1.0), "shift={shift} j={j}: {m} vs {quad}");
        }
    }
}

#[test]
fn support_width_grows_by_one_per_order() {
    for kind in [InitialBasisKind::Box, InitialBasisKind::RaisedCosine] {
        for order in 1..=5 {
            let f = basis(&kind, order).unwrap();
            assert_eq!(f.support_width(), order as f64, "{kind:?} order {order}");
        }
    }
}

#[test]
fn integral_is_preserved_by_convolution() {
    for kind in [InitialBasisKind::Box, InitialBasisKind::RaisedCosine] {
        let seed = basis(&kind, 1).unwrap().integral();
        for order in 2..=5 {
            let f = basis(&kind, order).unwrap();
            assert!((f.integral() - seed).abs() <= 1e-14, "{kind:?} order {order}");
            assert!((integral_by_quadrature(&f) - seed).abs() <= 1e-14, "{kind:?} order {order}");
        }
    }
}

#[test]
fn bsplines_are_rational_and_even() {
    for order in 1..=5 {
        let s = ExactSpline::bspline(order);
        for i in 0..=40 {
            let x = q(i - 20, 8);
            assert_eq!(s.evaluate(&x), s.evaluate(&-x.clone()), "order {order} x={x}");
        }
    }
}

/// Jump of `f` across each interior breakpoint, estimated from one-sided
/// values at distance `delta`.
fn max_jump(f: &PiecewiseFunction, delta: f64) -> f64 {
    let bps = f.breakpoints();
    bps.iter().map(|&b| (f.evaluate(b + delta) - f.evaluate(b - delta)).abs()).fold(0.0, f64::max)
}

fn nth_derivative(f: &PiecewiseFunction, n: usize) -> PiecewiseFunction {
    (0..n).fold(f.clone(), |g, _| g.derivative())
}

#[test]
fn box_family_smoothness_ladder() {
    for order in 2..=5 {
        let f = basis(&InitialBasisKind::Box, order).unwrap();
        let d = nth_derivative(&f, order - 2);
        let coarse = max_jump(&d, 1e-3);
        let fine = max_jump(&d, 1e-6);
        assert!(fine < 1e-5 && fine < coarse, "order {order}: {coarse} -> {fine}");
        // the next derivative jumps
        let dd = nth_derivative(&f, order - 1);
        assert!(max_jump(&dd, 1e-9) > 0.1, "order {order}");
    }
}

#[test]
fn raised_cosine_family_smoothness_ladder() {
    for order in 2..=4 {
        let f = basis(&InitialBasisKind::RaisedCosine, order).unwrap();
        let d = nth_derivative(&f, order);
        let coarse = max_jump(&d, 1e-3);
        let fine = max_jump(&d, 1e-6);
        assert!(fine < 1e-3 * coarse.max(1.0), "order {order}: {coarse} -> {fine}");
    }
}

#[test]
fn raised_cosine_derivative_is_continuous_at_the_origin() {
    let f = basis(&InitialBasisKind::RaisedCosine, 2).unwrap();
    let d = f.derivative();
    let step = 1e-6;
    let left = (f.evaluate(-step) - f.evaluate(-2.0 * step)) / step;
    let right = (f.evaluate(2.0 * step) - f.evaluate(step)) / step;
    assert!((left - right).abs() < 1e-5);
    assert!((d.evaluate(-1e-12) - d.evaluate(1e-12)).abs() < 1e-10);
}

#[test]
fn serialization_round_trip_is_bit_identical() {
    for kind in [InitialBasisKind::Box, InitialBasisKind::RaisedCosine] {
        let f = basis(&kind, 4).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        let back: PiecewiseFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        for i in 0..100 {
            let x = -2.0 + 0.04 * i as f64;
            assert_eq!(back.evaluate(x).to_bits(), f.evaluate(x).to_bits());
        }
    }
}

#[test]
fn malformed_payloads_are_rejected() {
    let bad = r#"{"breakpoints":[0.0,-1.0],"pieces":[[]]}"#;
    assert!(serde_json::from_str::<PiecewiseFunction>(bad).is_err());
    let bad = r#"{"breakpoints":[0.0,1.0,2.0],"pieces":[[]]}"#;
    assert!(serde_json::from_str::<PiecewiseFunction>(bad).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bsplines_match_closed_forms_exactly(order in 2usize..=4, num in -2400i64..=2400) {
        let x = q(num, 1000);
        let exact = ExactSpline::bspline(order).evaluate(&x);
        prop_assert_eq!(&exact, &bspline_formula(order, &x));
        // binary64 form agrees with the rational one
        let xf = num as f64 / 1000.0;
        let f = basis(&InitialBasisKind::Box, order).unwrap();
        let want = bspline_formula(order, &f64_to_rational(xf));
        prop_assert!((f.evaluate(xf) - siac::basisfn::rational_to_f64(&want)).abs() < 1e-15);
    }

    #[test]
    fn raised_cosines_match_closed_forms(order in 2usize..=4, x in -2.2f64..2.2) {
        let f = basis(&InitialBasisKind::RaisedCosine, order).unwrap();
        prop_assume!(away_from(&f, x, 1e-12));
        let got = f.evaluate(x);
        let want = raised_cosine_formula(order, x);
        prop_assert!((got - want).abs() <= 1e-14, "order {} x={}: {} vs {}", order, x, got, want);
    }

    #[test]
    fn derivative_is_a_unit_difference(order in 2usize..=5, x in -3.0f64..3.0, rc in any::<bool>()) {
        let kind = if rc { InitialBasisKind::RaisedCosine } else { InitialBasisKind::Box };
        let f = basis(&kind, order).unwrap();
        let lower = basis(&kind, order - 1).unwrap();
        prop_assume!(away_from(&f, x, 1e-9) && away_from(&lower, x + 0.5, 1e-9) && away_from(&lower, x - 0.5, 1e-9));
        let lhs = f.derivative().evaluate(x);
        let rhs = lower.evaluate(x + 0.5) - lower.evaluate(x - 0.5);
        prop_assert!((lhs - rhs).abs() <= 1e-13, "{:?} order {} x={}: {} vs {}", kind, order, x, lhs, rhs);
    }

    #[test]
    fn central_bsplines_are_even(order in 1usize..=5, x in 0.0f64..3.0) {
        let f = basis(&InitialBasisKind::Box, order).unwrap();
        prop_assume!(away_from(&f, x, 1e-12));
        prop_assert_eq!(f.evaluate(x), f.evaluate(-x));
    }
}
