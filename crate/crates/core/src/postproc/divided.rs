//! Central divided differences `∂_h v(x) = (v(x + h/2) - v(x - h/2)) / h`.

use super::PostError;

/// `α`-fold central difference of periodic samples with spacing `dx`.
/// `h/2` must be a whole number of grid steps.
pub fn divided_difference(samples: &[f64], dx: f64, h: f64, alpha: usize) -> Result<Vec<f64>, PostError> {
    if alpha == 0 {
        return Err(PostError::Grid("order must be at least 1".into()));
    }
    let steps = 0.5 * h / dx;
    let s = steps.round();
    if s < 1.0 || (steps - s).abs() > 1e-9 * steps.max(1.0) {
        return Err(PostError::Grid(format!("h/2 = {} is not a multiple of the spacing {dx}", 0.5 * h)));
    }
    let s = s as usize;
    let n = samples.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut v = samples.to_vec();
    for _ in 0..alpha {
        v = (0..n).map(|i| (v[(i + s) % n] - v[(i + n - s % n) % n]) / h).collect();
    }
    Ok(v)
}

/// `∂_h^α f(x) = h^-α Σ_i (-1)^i C(α, i) f(x + (α/2 - i) h)`.
pub fn divided_difference_at<F: Fn(f64) -> f64>(f: F, x: f64, h: f64, alpha: usize) -> f64 {
    let mut binom = 1.0;
    let mut acc = 0.0;
    for i in 0..=alpha {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * f(x + (alpha as f64 / 2.0 - i as f64) * h);
        binom = binom * (alpha - i) as f64 / (i + 1) as f64;
    }
    acc / h.powi(alpha as i32)
}
