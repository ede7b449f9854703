//! A kernel `Σ c_γ ψ(y - x_γ)` rewritten as one polynomial per piece.
//!
//! Compact kernels have `Σ|c_γ|` in the thousands, so summing the shifted
//! splines in binary64 cancels most of the significant digits. Here the
//! sum is formed exactly and each local coefficient is rounded once.

use num::{BigRational, Zero};

use crate::basisfn::{f64_to_rational, rational_to_f64, taylor_shift, ExactSpline};

#[derive(Debug, Clone, PartialEq)]
pub struct LocalPolynomialKernel {
    breakpoints: Vec<f64>,
    /// `pieces[i][m]` multiplies `(y - breakpoints[i])^m`.
    pieces: Vec<Vec<f64>>,
    /// Exact integral of the collapsed sum, rounded once.
    integral: f64,
}

impl LocalPolynomialKernel {
    pub fn from_bspline(spline: &ExactSpline, nodes: &[f64], coefficients: &[f64]) -> Self {
        let weights: Vec<BigRational> = coefficients.iter().map(|&c| f64_to_rational(c)).collect();
        Self::from_bspline_exact(spline, nodes, &weights)
    }

    pub fn from_bspline_exact(spline: &ExactSpline, nodes: &[f64], weights: &[BigRational]) -> Self {
        let shifts: Vec<BigRational> = nodes.iter().map(|&x| f64_to_rational(x)).collect();
        let mut cuts: Vec<BigRational> =
            shifts.iter().flat_map(|s| spline.breakpoints().iter().map(move |b| b + s)).collect();
        cuts.sort();
        cuts.dedup();
        let sb = spline.breakpoints();
        let mut pieces = Vec::with_capacity(cuts.len().saturating_sub(1));
        let mut integral = BigRational::zero();
        for w in cuts.windows(2) {
            let mid = (&w[0] + &w[1]) / BigRational::from_integer(2.into());
            let mut acc: Vec<BigRational> = Vec::new();
            for (s, c) in shifts.iter().zip(weights) {
                let u = &mid - s;
                if u <= sb[0] || u >= sb[sb.len() - 1] {
                    continue;
                }
                let idx = sb.partition_point(|b| b <= &u) - 1;
                let local = taylor_shift(&spline.pieces()[idx], &(&w[0] - s));
                if acc.len() < local.len() {
                    acc.resize(local.len(), BigRational::zero());
                }
                for (a, l) in acc.iter_mut().zip(&local) {
                    *a += c * l;
                }
            }
            let width = &w[1] - &w[0];
            let mut power = width.clone();
            for (m, a) in acc.iter().enumerate() {
                integral += a * &power / BigRational::from_integer((m + 1).into());
                power *= &width;
            }
            pieces.push(acc.iter().map(rational_to_f64).collect());
        }
        Self { breakpoints: cuts.iter().map(rational_to_f64).collect(), pieces, integral: rational_to_f64(&integral) }
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    /// Upper bound on `|K|`: the largest `Σ_m |a_m| w^m` over pieces of width `w`.
    pub fn magnitude(&self) -> f64 {
        self.pieces
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(p, w)| p.iter().rev().fold(0.0, |acc, c| acc * (w[1] - w[0]) + c.abs()))
            .fold(0.0, f64::max)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn evaluate(&self, y: f64) -> f64 {
        let n = self.breakpoints.len();
        if n < 2 || y < self.breakpoints[0] || y > self.breakpoints[n - 1] {
            return 0.0;
        }
        let idx = (self.breakpoints.partition_point(|b| *b <= y) - 1).min(n - 2);
        let t = y - self.breakpoints[idx];
        self.pieces[idx].iter().rev().fold(0.0, |acc, c| acc * t + c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_sum() {
        let spline = ExactSpline::bspline(2);
        let func = spline.to_piecewise();
        let nodes = [-1.0, 0.0, 1.0];
        let coeffs = [-1.0 / 12.0, 7.0 / 6.0, -1.0 / 12.0];
        let k = LocalPolynomialKernel::from_bspline(&spline, &nodes, &coeffs);
        assert_eq!(k.breakpoints(), &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        for i in 0..=80 {
            let y = -2.0 + 0.05 * i as f64;
            let direct: f64 = nodes.iter().zip(&coeffs).map(|(x, c)| c * func.evaluate(y - x)).sum();
            assert!((k.evaluate(y) - direct).abs() < 1e-15, "y={y}");
        }
        assert_eq!(k.evaluate(2.5), 0.0);
    }
}
