//! Moment system and the two coefficient solvers.
//!
//! The kernel `Σ c_γ φ(x - x_γ)` reproduces polynomials through degree `2k`
//! iff its raw moments about the origin satisfy
//! `Σ_γ c_γ M_j(γ) = δ_{j0}` for `j = 0..=2k`, where
//! `M_j(γ) = ∫ φ(ξ - x_γ) ξ^j dξ`.

use num::{BigRational, One, Zero};

use crate::basisfn::{f64_to_rational, rational_to_f64};

use super::extended::DoubleDouble;
use super::{FilterError, KernelBasis, NodeDistribution};

/// Largest 1-norm condition estimate accepted from binary64 moment data.
pub const MAX_CONDITION: f64 = 1e15;

/// `A[j][γ] = M_j(γ)`, rows indexed by moment degree.
pub fn moment_matrix(basis: &KernelBasis, nodes: &NodeDistribution) -> Result<Vec<Vec<f64>>, FilterError> {
    let size = nodes.nodes().len();
    let matrix: Vec<Vec<f64>> =
        (0..size).map(|j| nodes.nodes().iter().map(|&x| basis.moment(j, x)).collect()).collect();
    if matrix.iter().flatten().any(|v| !v.is_finite()) {
        return Err(FilterError::Quadrature("non-finite moment".into()));
    }
    Ok(matrix)
}

/// Exact moment matrix; `None` unless the basis carries an exact form.
pub fn exact_moment_matrix(basis: &KernelBasis, nodes: &NodeDistribution) -> Option<Vec<Vec<BigRational>>> {
    let shifts: Vec<BigRational> = nodes.nodes().iter().map(|&x| f64_to_rational(x)).collect();
    (0..shifts.len()).map(|j| shifts.iter().map(|s| basis.exact_moment(j, s)).collect::<Option<Vec<_>>>()).collect()
}

/// `e_0`, the right-hand side of the moment conditions.
fn unit_rhs(n: usize) -> Vec<f64> {
    let mut rhs = vec![0.0; n];
    rhs[0] = 1.0;
    rhs
}

fn exact_unit_rhs(n: usize) -> Vec<BigRational> {
    let mut rhs = vec![BigRational::zero(); n];
    rhs[0] = BigRational::one();
    rhs
}

/// Gaussian elimination over the rationals. `None` when singular.
pub fn solve_rational(matrix: &[Vec<BigRational>], rhs: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = matrix.len();
    let mut a: Vec<Vec<BigRational>> = matrix
        .iter()
        .zip(rhs)
        .map(|(row, b)| row.iter().cloned().chain(std::iter::once(b.clone())).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = BigRational::one() / &a[col][col];
        for c in col..=n {
            a[col][c] = &a[col][c] * &inv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in col..=n {
                let delta = &factor * &a[col][c];
                a[r][c] -= delta;
            }
        }
    }
    Some(a.into_iter().map(|row| row[n].clone()).collect())
}

/// Partial-pivoting elimination carried in double-double, returning the
/// solution and a 1-norm condition estimate `‖A‖₁‖A⁻¹‖₁`.
pub fn solve_extended(matrix: &[Vec<f64>], rhs: &[f64]) -> Result<(Vec<f64>, f64), FilterError> {
    let dd: Vec<Vec<DoubleDouble>> = matrix.iter().map(|r| r.iter().map(|&v| v.into()).collect()).collect();
    let (sol, condition) = solve_extended_dd(&dd, rhs)?;
    Ok((sol.iter().map(|v| v.to_f64()).collect(), condition))
}

/// [`solve_extended`] on double-double data, keeping the full solution.
pub fn solve_extended_dd(matrix: &[Vec<DoubleDouble>], rhs: &[f64]) -> Result<(Vec<DoubleDouble>, f64), FilterError> {
    let n = matrix.len();
    // augmented with the identity to get the inverse for the condition estimate
    let mut a: Vec<Vec<DoubleDouble>> = (0..n)
        .map(|r| {
            let mut row = matrix[r].clone();
            row.push(rhs[r].into());
            row.extend((0..n).map(|c| if c == r { DoubleDouble::ONE } else { DoubleDouble::ZERO }));
            row
        })
        .collect();
    let width = 2 * n + 1;
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&x, &y| a[x][col].abs().to_f64().total_cmp(&a[y][col].abs().to_f64())).expect("non-empty");
        if a[pivot][col].to_f64() == 0.0 {
            return Err(FilterError::IllConditioned { condition: f64::INFINITY });
        }
        a.swap(col, pivot);
        let p = a[col][col];
        for c in col..width {
            a[col][c] = a[col][c] / p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r][col];
            if factor.to_f64() == 0.0 {
                continue;
            }
            for c in col..width {
                a[r][c] = a[r][c] - factor * a[col][c];
            }
        }
    }
    let norm1 = |cols: &dyn Fn(usize, usize) -> f64| -> f64 {
        (0..n).map(|c| (0..n).map(|r| cols(r, c).abs()).sum::<f64>()).fold(0.0, f64::max)
    };
    let a_norm = norm1(&|r, c| matrix[r][c].to_f64());
    let inv_norm = norm1(&|r, c| a[r][n + 1 + c].to_f64());
    let condition = a_norm * inv_norm;
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(FilterError::IllConditioned { condition });
    }
    Ok((a.iter().map(|row| row[n]).collect(), condition))
}

/// `r` as the nearest double plus the nearest double to the remainder.
pub fn split_rational(r: &BigRational) -> DoubleDouble {
    let hi = rational_to_f64(r);
    DoubleDouble::new(hi, rational_to_f64(&(r - f64_to_rational(hi))))
}

/// Unique coefficients making the kernel reproduce polynomials through
/// degree `2k`. Exact for the B-spline family, double-double otherwise.
pub fn solve_coefficients(basis: &KernelBasis, nodes: &NodeDistribution) -> Result<Vec<f64>, FilterError> {
    Ok(solve_coefficients_dd(basis, nodes)?.iter().map(|c| c.hi()).collect())
}

/// [`solve_coefficients`] with a second word of precision per coefficient.
pub fn solve_coefficients_dd(basis: &KernelBasis, nodes: &NodeDistribution) -> Result<Vec<DoubleDouble>, FilterError> {
    if basis.integral() == 0.0 {
        return Err(FilterError::Basis(crate::basisfn::BasisError::ZeroIntegral));
    }
    if let Some(exact) = exact_moment_matrix(basis, nodes) {
        let sol = solve_rational(&exact, &exact_unit_rhs(exact.len()))
            .ok_or(FilterError::IllConditioned { condition: f64::INFINITY })?;
        return Ok(sol.iter().map(split_rational).collect());
    }
    let mut matrix = moment_matrix(basis, nodes)?;
    // the zeroth moment does not depend on the shift
    matrix[0].fill(basis.integral());
    let dd: Vec<Vec<DoubleDouble>> = matrix.iter().map(|r| r.iter().map(|&v| v.into()).collect()).collect();
    let (sol, _) = solve_extended_dd(&dd, &unit_rhs(matrix.len()))?;
    Ok(sol)
}

/// Exact rational coefficients for the B-spline family.
pub fn solve_coefficients_exact(basis: &KernelBasis, nodes: &NodeDistribution) -> Option<Vec<BigRational>> {
    let exact = exact_moment_matrix(basis, nodes)?;
    solve_rational(&exact, &exact_unit_rhs(exact.len()))
}

/// Largest |residual| of the moment conditions, `max_j |Σ c_γ M_j(γ) - δ_j0|`.
pub fn moment_residual(matrix: &[Vec<f64>], coefficients: &[f64]) -> f64 {
    matrix
        .iter()
        .enumerate()
        .map(|(j, row)| {
            let s: f64 = row.iter().zip(coefficients).map(|(a, c)| a * c).sum();
            (s - if j == 0 { 1.0 } else { 0.0 }).abs()
        })
        .fold(0.0, f64::max)
}
