//! Exact rational piecewise polynomials for the central B-spline family.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use super::piecewise::{PiecewiseFunction, Term};

/// Piecewise polynomial with rational breakpoints and dense rational
/// coefficients (`pieces[i][n]` multiplies `x^n`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSpline {
    breakpoints: Vec<BigRational>,
    pieces: Vec<Vec<BigRational>>,
}

fn half() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(2))
}

fn eval_poly(coeffs: &[BigRational], x: &BigRational) -> BigRational {
    coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut b = BigInt::one();
    for i in 0..k {
        b = b * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    b
}

/// Coefficients of `x -> p(x + s)`.
pub fn taylor_shift(coeffs: &[BigRational], s: &BigRational) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); coeffs.len()];
    for (n, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mut spow = BigRational::one();
        // walk i downward so s^(n-i) builds up incrementally
        for i in (0..=n).rev() {
            out[i] += c * BigRational::from_integer(binomial(n, i)) * &spow;
            spow *= s;
        }
    }
    out
}

fn antiderivative(coeffs: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); coeffs.len() + 1];
    for (n, c) in coeffs.iter().enumerate() {
        out[n + 1] = c / BigRational::from_integer(BigInt::from(n + 1));
    }
    out
}

fn trim(mut coeffs: Vec<BigRational>) -> Vec<BigRational> {
    while coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
    coeffs
}

impl ExactSpline {
    /// `χ_[-1/2, 1/2]`.
    pub fn unit_box() -> Self {
        Self { breakpoints: vec![-half(), half()], pieces: vec![vec![BigRational::one()]] }
    }

    /// Central B-spline `ψ^(order)` by repeated box convolution.
    pub fn bspline(order: usize) -> Self {
        assert!(order >= 1, "B-spline order starts at 1");
        (1..order).fold(Self::unit_box(), |acc, _| acc.convolve_with_box())
    }

    pub fn breakpoints(&self) -> &[BigRational] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Vec<BigRational>] {
        &self.pieces
    }

    /// Same evaluation convention as [`PiecewiseFunction::evaluate`].
    pub fn evaluate(&self, x: &BigRational) -> BigRational {
        let n = self.breakpoints.len();
        if n < 2 || x < &self.breakpoints[0] || x > &self.breakpoints[n - 1] {
            return BigRational::zero();
        }
        let idx = if x == &self.breakpoints[n - 1] { n - 2 } else { self.breakpoints.partition_point(|b| b <= x) - 1 };
        eval_poly(&self.pieces[idx], x)
    }

    /// `∫ f(ξ - shift) ξ^j dξ`, exactly.
    pub fn moment(&self, j: usize, shift: &BigRational) -> BigRational {
        let mut total = BigRational::zero();
        for (i, piece) in self.pieces.iter().enumerate() {
            // piece(t) (t + shift)^j
            let mut weight = vec![BigRational::zero(); j + 1];
            let mut spow = BigRational::one();
            for p in (0..=j).rev() {
                weight[p] = BigRational::from_integer(binomial(j, p)) * &spow;
                spow *= shift;
            }
            let mut product = vec![BigRational::zero(); piece.len() + j];
            for (a, ca) in piece.iter().enumerate() {
                for (b, cb) in weight.iter().enumerate() {
                    product[a + b] += ca * cb;
                }
            }
            let anti = antiderivative(&product);
            total += eval_poly(&anti, &self.breakpoints[i + 1]) - eval_poly(&anti, &self.breakpoints[i]);
        }
        total
    }

    pub fn convolve_with_box(&self) -> Self {
        let h = half();
        let mut running = Vec::with_capacity(self.pieces.len());
        let mut acc = BigRational::zero();
        for (i, piece) in self.pieces.iter().enumerate() {
            let (a, b) = (&self.breakpoints[i], &self.breakpoints[i + 1]);
            let mut anti = antiderivative(piece);
            let at_a = eval_poly(&anti, a);
            let inc = eval_poly(&anti, b) - &at_a;
            anti[0] += &acc - at_a;
            acc += inc;
            running.push(anti);
        }
        let total = acc;
        let first = self.breakpoints[0].clone();
        let last = self.breakpoints[self.breakpoints.len() - 1].clone();
        let running_at = |x: &BigRational| -> Vec<BigRational> {
            if x < &first {
                vec![]
            } else if x >= &last {
                vec![total.clone()]
            } else {
                let idx = self.breakpoints.partition_point(|b| b <= x) - 1;
                running[idx].clone()
            }
        };

        let mut breakpoints: Vec<BigRational> = self.breakpoints.iter().flat_map(|b| [b - &h, b + &h]).collect();
        breakpoints.sort();
        breakpoints.dedup();

        let two = BigRational::from_integer(BigInt::from(2));
        let pieces = breakpoints
            .windows(2)
            .map(|w| {
                let mid = (&w[0] + &w[1]) / &two;
                let plus = taylor_shift(&running_at(&(&mid + &h)), &h);
                let minus = taylor_shift(&running_at(&(&mid - &h)), &-&h);
                let len = plus.len().max(minus.len());
                let diff = (0..len)
                    .map(|n| {
                        let p = plus.get(n).cloned().unwrap_or_else(BigRational::zero);
                        let m = minus.get(n).cloned().unwrap_or_else(BigRational::zero);
                        p - m
                    })
                    .collect();
                trim(diff)
            })
            .collect();
        Self { breakpoints, pieces }
    }

    /// Rounds to binary64 (each rational to its nearest double).
    pub fn to_piecewise(&self) -> PiecewiseFunction {
        let breakpoints = self.breakpoints.iter().map(rational_to_f64).collect();
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                p.iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(n, c)| Term::poly(n as u32, rational_to_f64(c)))
                    .collect()
            })
            .collect();
        PiecewiseFunction::new(breakpoints, pieces).expect("exact spline has increasing breakpoints")
    }
}

/// Correctly rounded conversion (normal range).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let neg = r.is_negative();
    let r = r.abs();
    let (numer, denom) = (r.numer(), r.denom());
    // quotient with 62-63 significant bits, remainder folded into a sticky bit
    let shift = 62i64 - (numer.bits() as i64 - denom.bits() as i64);
    let (n, d) =
        if shift >= 0 { (numer << shift as usize, denom.clone()) } else { (numer.clone(), denom << (-shift) as usize) };
    let q = &n / &d;
    let sticky = !(n - &q * &d).is_zero();
    let mut mant = q.to_u64().expect("quotient fits in 64 bits");
    if sticky {
        mant |= 1;
    }
    let mut v = mant as f64;
    let mut e = -shift;
    while e > 0 {
        let step = e.min(1000);
        v *= 2f64.powi(step as i32);
        e -= step;
    }
    while e < 0 {
        let step = (-e).min(1000);
        v *= 2f64.powi(-(step as i32));
        e += step;
    }
    if neg {
        -v
    } else {
        v
    }
}

/// Exact rational value of a finite binary64.
pub fn f64_to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}
