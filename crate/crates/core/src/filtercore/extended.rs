//! Double-double arithmetic (~31 significant digits).

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

/// π/2 to double-double precision.
const HALF_PI: DoubleDouble = DoubleDouble { hi: std::f64::consts::FRAC_PI_2, lo: 6.123233995736766e-17 };

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Exact sum of two doubles.
    pub fn sum(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, b);
        Self { hi, lo }
    }

    pub fn powi(self, n: u32) -> Self {
        (0..n).fold(Self::ONE, |acc, _| acc * self)
    }

    /// `(sin x, cos x)`, reduced by multiples of π/2 and summed by Taylor series.
    pub fn sin_cos(self) -> (Self, Self) {
        let q = (self.hi / HALF_PI.hi).round();
        let r = self - HALF_PI * Self::from(q);
        let r2 = r * r;
        let (mut s, mut c) = (r, Self::ONE);
        let (mut ts, mut tc) = (r, Self::ONE);
        for i in 1..=20 {
            let n = 2.0 * i as f64;
            ts = -(ts * r2) / Self::from(n * (n + 1.0));
            tc = -(tc * r2) / Self::from((n - 1.0) * n);
            s = s + ts;
            c = c + tc;
            if tc.hi.abs() < 1e-34 {
                break;
            }
        }
        match (q as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        // long division: two correction steps
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Self::from(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Self::from(q2);
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from(q3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_bits_lost_in_binary64() {
        let third = DoubleDouble::ONE / DoubleDouble::from(3.0);
        let back = third * DoubleDouble::from(3.0) - DoubleDouble::ONE;
        assert!(back.to_f64().abs() < 1e-31);
        let big = DoubleDouble::from(1e16) + DoubleDouble::from(1.0);
        assert_eq!((big - DoubleDouble::from(1e16)).to_f64(), 1.0);
    }

    #[test]
    fn sin_cos_keep_the_second_word() {
        // sin(π) is the tail of π/2 doubled, up to sign
        let pi = HALF_PI + HALF_PI;
        let (s, c) = pi.sin_cos();
        assert!(s.to_f64().abs() < 1e-30 && (c.to_f64() + 1.0).abs() < 1e-30);
        for &x in &[0.3, -1.2, 2.5, 7.0, -15.9] {
            let (s, c) = DoubleDouble::from(x).sin_cos();
            assert!((s.to_f64() - f64::sin(x)).abs() < 2e-16 && (c.to_f64() - f64::cos(x)).abs() < 2e-16);
            assert!((s * s + c * c - DoubleDouble::ONE).to_f64().abs() < 1e-30);
        }
        // sin(2x) = 2 sin x cos x with the second word included
        let x = DoubleDouble::new(0.7, 1e-18);
        let (s1, c1) = x.sin_cos();
        let (s2, _) = (x + x).sin_cos();
        assert!((s2 - DoubleDouble::from(2.0) * s1 * c1).to_f64().abs() < 1e-30);
    }

    #[test]
    fn abs_and_neg() {
        let x = DoubleDouble::new(-2.0, 1e-20);
        assert_eq!(x.abs().hi(), 2.0);
        assert_eq!((-x).hi(), 2.0);
    }
}
