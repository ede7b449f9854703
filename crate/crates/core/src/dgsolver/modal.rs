//! Orthonormal Legendre basis on `[-1, 1]`: `P̃_m = sqrt((2m+1)/2) P_m`.

use crate::quadrature::GaussLegendre;

/// `P̃_0(r), ..., P̃_k(r)` written into `out`.
pub fn modal_values(r: f64, out: &mut [f64]) {
    let mut p_prev = 1.0;
    let mut p = r;
    for (m, slot) in out.iter_mut().enumerate() {
        let pm = match m {
            0 => 1.0,
            1 => r,
            _ => {
                let next = ((2 * m - 1) as f64 * r * p - (m - 1) as f64 * p_prev) / m as f64;
                p_prev = p;
                p = next;
                next
            }
        };
        *slot = pm * norm(m);
    }
}

pub fn modal_vec(k: usize, r: f64) -> Vec<f64> {
    let mut v = vec![0.0; k + 1];
    modal_values(r, &mut v);
    v
}

#[inline]
pub fn norm(m: usize) -> f64 {
    ((2 * m + 1) as f64 / 2.0).sqrt()
}

/// `P̃_m(1)`.
pub fn right_trace(m: usize) -> f64 {
    norm(m)
}

/// `P̃_m(-1)`.
pub fn left_trace(m: usize) -> f64 {
    if m.is_multiple_of(2) {
        norm(m)
    } else {
        -norm(m)
    }
}

/// Precomputed element operators for degree `k`.
#[derive(Debug, Clone)]
pub struct ModalOperators {
    pub k: usize,
    /// `D[m][n] = ∫ P̃_n P̃_m' dr`, row-major `(k+1)²`.
    pub stiffness: Vec<f64>,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
}

impl ModalOperators {
    pub fn new(k: usize) -> Self {
        let p = k + 1;
        let rule = GaussLegendre::new(p);
        let mut stiffness = vec![0.0; p * p];
        let mut vals = vec![0.0; p];
        for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
            modal_values(r, &mut vals);
            let ders = modal_derivatives(k, r);
            for m in 0..p {
                for n in 0..p {
                    stiffness[m * p + n] += w * vals[n] * ders[m];
                }
            }
        }
        Self { k, stiffness, right: (0..p).map(right_trace).collect(), left: (0..p).map(left_trace).collect() }
    }
}

/// `P̃_m'(r)` for `m = 0..=k`.
pub fn modal_derivatives(k: usize, r: f64) -> Vec<f64> {
    (0..=k).map(|m| crate::quadrature::legendre_with_derivative(m, r).1 * norm(m)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal() {
        let rule = GaussLegendre::new(8);
        for m in 0..6 {
            for n in 0..6 {
                let ip = rule.integrate(-1.0, 1.0, |r| modal_vec(5, r)[m] * modal_vec(5, r)[n]);
                let want = if m == n { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn traces_and_stiffness() {
        let ops = ModalOperators::new(3);
        assert_eq!(modal_vec(3, 1.0), ops.right);
        for (a, b) in modal_vec(3, -1.0).iter().zip(&ops.left) {
            assert!((a - b).abs() < 1e-15);
        }
        // D + Dᵀ = P̃(1)P̃(1)ᵀ - P̃(-1)P̃(-1)ᵀ by integration by parts
        let p = 4;
        for m in 0..p {
            for n in 0..p {
                let lhs = ops.stiffness[m * p + n] + ops.stiffness[n * p + m];
                let rhs = ops.right[m] * ops.right[n] - ops.left[m] * ops.left[n];
                assert!((lhs - rhs).abs() < 1e-13);
            }
        }
    }
}
