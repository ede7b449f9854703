use rayon::prelude::*;

use crate::quadrature::GaussLegendre;

use super::modal::{modal_values, modal_vec};
use super::{DgError, Mesh1D, Mesh2D};

/// Degree-`k` modal field on a 1D mesh; coefficients element-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DGField {
    mesh: Mesh1D,
    k: usize,
    t: f64,
    coeffs: Vec<f64>,
}

impl DGField {
    pub fn zeros(mesh: Mesh1D, k: usize) -> Self {
        Self { mesh, k, t: 0.0, coeffs: vec![0.0; mesh.n * (k + 1)] }
    }

    pub fn from_coefficients(mesh: Mesh1D, k: usize, t: f64, coeffs: Vec<f64>) -> Result<Self, DgError> {
        if coeffs.len() != mesh.n * (k + 1) {
            return Err(DgError::Shape { expected: mesh.n * (k + 1), got: coeffs.len() });
        }
        Ok(Self { mesh, k, t, coeffs })
    }

    /// Element-wise L2 projection with `k+3` Gauss points.
    pub fn project<F: Fn(f64) -> f64 + Sync>(mesh: Mesh1D, k: usize, f: F) -> Self {
        let p = k + 1;
        let rule = GaussLegendre::new(k + 3);
        let basis: Vec<Vec<f64>> = rule.nodes.iter().map(|&r| modal_vec(k, r)).collect();
        let mut coeffs = vec![0.0; mesh.n * p];
        coeffs.par_chunks_mut(p).enumerate().for_each(|(j, out)| {
            for ((&r, &w), phi) in rule.nodes.iter().zip(&rule.weights).zip(&basis) {
                let v = f(mesh.from_reference(j, r));
                for m in 0..p {
                    out[m] += w * v * phi[m];
                }
            }
        });
        Self { mesh, k, t: 0.0, coeffs }
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn set_time(&mut self, t: f64) {
        self.t = t;
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn element(&self, j: usize) -> &[f64] {
        let p = self.k + 1;
        &self.coeffs[j * p..(j + 1) * p]
    }

    /// Value in element `j` at reference coordinate `r`.
    pub fn evaluate_in(&self, j: usize, r: f64) -> f64 {
        let mut buf = [0.0; 16];
        let mut heap;
        let phi: &mut [f64] = if self.k < buf.len() {
            &mut buf[..=self.k]
        } else {
            heap = vec![0.0; self.k + 1];
            &mut heap
        };
        modal_values(r, phi);
        self.element(j).iter().zip(phi.iter()).map(|(c, b)| c * b).sum()
    }

    /// Value at `x` (wrapped periodically; interfaces take the right element).
    pub fn evaluate(&self, x: f64) -> f64 {
        let (j, r) = self.mesh.locate(x);
        self.evaluate_in(j, r)
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.evaluate(x)).collect()
    }

    /// `∫ u_h dx`.
    pub fn mass(&self) -> f64 {
        let w0 = std::f64::consts::SQRT_2 * 0.5 * self.mesh.h();
        (0..self.mesh.n).map(|j| self.element(j)[0] * w0).sum()
    }

    /// `‖u_h‖_{L2}`, exact via orthonormality.
    pub fn norm(&self) -> f64 {
        (0.5 * self.mesh.h() * self.coeffs.iter().map(|c| c * c).sum::<f64>()).sqrt()
    }

    /// Largest `|u(x_{j+1/2}^+) - u(x_{j+1/2}^-)|` over all interfaces.
    pub fn max_jump(&self) -> f64 {
        (0..self.mesh.n)
            .map(|j| (self.evaluate_in((j + 1) % self.mesh.n, -1.0) - self.evaluate_in(j, 1.0)).abs())
            .fold(0.0, f64::max)
    }

    /// `sqrt(∫ (u - u_h)² / |Ω|)` with `k+3` Gauss points per element.
    pub fn l2_error<F: Fn(f64) -> f64 + Sync>(&self, exact: F) -> f64 {
        let rule = GaussLegendre::new(self.k + 3);
        let half = 0.5 * self.mesh.h();
        let per_element: Vec<f64> = (0..self.mesh.n)
            .into_par_iter()
            .map(|j| {
                rule.nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&r, &w)| {
                        let d = exact(self.mesh.from_reference(j, r)) - self.evaluate_in(j, r);
                        w * d * d
                    })
                    .sum::<f64>()
            })
            .collect();
        (half * per_element.iter().sum::<f64>() / self.mesh.length()).sqrt()
    }

    /// `αu + βv` on the same mesh and degree.
    pub fn combine(&self, alpha: f64, other: &DGField, beta: f64) -> Result<DGField, DgError> {
        if self.mesh != other.mesh || self.k != other.k {
            return Err(DgError::Shape { expected: self.coeffs.len(), got: other.coeffs.len() });
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| alpha * a + beta * b).collect();
        Ok(DGField { coeffs, ..self.clone() })
    }
}

/// Degree-`k` tensor field on a 2D mesh. Element `(ix, iy)` is stored at
/// [`Mesh2D::index`]; within an element mode `(p, q)` sits at `q(k+1) + p`.
#[derive(Debug, Clone, PartialEq)]
pub struct DGField2D {
    mesh: Mesh2D,
    k: usize,
    t: f64,
    coeffs: Vec<f64>,
}

impl DGField2D {
    pub fn from_coefficients(mesh: Mesh2D, k: usize, t: f64, coeffs: Vec<f64>) -> Result<Self, DgError> {
        let expected = mesh.elements() * (k + 1) * (k + 1);
        if coeffs.len() != expected {
            return Err(DgError::Shape { expected, got: coeffs.len() });
        }
        Ok(Self { mesh, k, t, coeffs })
    }

    /// Tensor L2 projection with `(k+3)²` Gauss points.
    pub fn project<F: Fn(f64, f64) -> f64 + Sync>(mesh: Mesh2D, k: usize, f: F) -> Self {
        let p = k + 1;
        let rule = GaussLegendre::new(k + 3);
        let basis: Vec<Vec<f64>> = rule.nodes.iter().map(|&r| modal_vec(k, r)).collect();
        let mut coeffs = vec![0.0; mesh.elements() * p * p];
        coeffs.par_chunks_mut(p * p).enumerate().for_each(|(e, out)| {
            let (ix, iy) = (e % mesh.x.n, e / mesh.x.n);
            for (a, (&rx, &wx)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
                let x = mesh.x.from_reference(ix, rx);
                for (b, (&ry, &wy)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
                    let v = wx * wy * f(x, mesh.y.from_reference(iy, ry));
                    for q in 0..p {
                        for pp in 0..p {
                            out[q * p + pp] += v * basis[a][pp] * basis[b][q];
                        }
                    }
                }
            }
        });
        Self { mesh, k, t: 0.0, coeffs }
    }

    pub fn mesh(&self) -> &Mesh2D {
        &self.mesh
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn set_time(&mut self, t: f64) {
        self.t = t;
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn element(&self, ix: usize, iy: usize) -> &[f64] {
        let s = (self.k + 1) * (self.k + 1);
        let e = self.mesh.index(ix, iy);
        &self.coeffs[e * s..(e + 1) * s]
    }

    pub fn evaluate_in(&self, ix: usize, iy: usize, r: f64, s: f64) -> f64 {
        let p = self.k + 1;
        let bx = modal_vec(self.k, r);
        let by = modal_vec(self.k, s);
        let c = self.element(ix, iy);
        (0..p).map(|q| by[q] * (0..p).map(|pp| c[q * p + pp] * bx[pp]).sum::<f64>()).sum()
    }

    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        let (ix, r) = self.mesh.x.locate(x);
        let (iy, s) = self.mesh.y.locate(y);
        self.evaluate_in(ix, iy, r, s)
    }

    pub fn mass(&self) -> f64 {
        let area = self.mesh.x.h() * self.mesh.y.h();
        // P̃_0(r)P̃_0(s) = 1/2, reference area 4, Jacobian area/4
        let s = (self.k + 1) * (self.k + 1);
        self.coeffs.iter().step_by(s).sum::<f64>() * 0.5 * area
    }

    pub fn norm(&self) -> f64 {
        let jac = 0.25 * self.mesh.x.h() * self.mesh.y.h();
        (jac * self.coeffs.iter().map(|c| c * c).sum::<f64>()).sqrt()
    }

    /// Tensor Gauss `(k+3)²` L2 error, normalized by the domain area.
    pub fn l2_error<F: Fn(f64, f64) -> f64 + Sync>(&self, exact: F) -> f64 {
        let rule = GaussLegendre::new(self.k + 3);
        let jac = 0.25 * self.mesh.x.h() * self.mesh.y.h();
        let total: f64 = (0..self.mesh.elements())
            .into_par_iter()
            .map(|e| {
                let (ix, iy) = (e % self.mesh.x.n, e / self.mesh.x.n);
                let mut acc = 0.0;
                for (&r, &wx) in rule.nodes.iter().zip(&rule.weights) {
                    for (&s, &wy) in rule.nodes.iter().zip(&rule.weights) {
                        let x = self.mesh.x.from_reference(ix, r);
                        let y = self.mesh.y.from_reference(iy, s);
                        let d = exact(x, y) - self.evaluate_in(ix, iy, r, s);
                        acc += wx * wy * d * d;
                    }
                }
                acc
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum();
        (jac * total / (self.mesh.x.length() * self.mesh.y.length())).sqrt()
    }
}
