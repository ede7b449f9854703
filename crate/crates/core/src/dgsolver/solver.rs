use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::modal::ModalOperators;
use super::{AdvectionProblem, DGField, DGField2D, DgError, Mesh1D, Mesh2D};

/// Magnitude above which a run is declared unstable.
const BLOWUP: f64 = 1e100;

/// How `Δt` follows from `h`, `k` and the domain length `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `Δt = C h^max(1, (k+1)/4)`.
    HPower,
    /// `Δt = C h (h/L)^max(0, (2k+1)/4 - 1)`: RK4 error shrinks like
    /// `h^(2k+1)` so it stays below the filtered error.
    #[default]
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeStepping {
    pub cfl: f64,
    pub rule: StepRule,
}

impl Default for TimeStepping {
    fn default() -> Self {
        Self { cfl: 0.05, rule: StepRule::default() }
    }
}

impl TimeStepping {
    pub fn dt(&self, h: f64, length: f64, k: usize) -> f64 {
        match self.rule {
            StepRule::HPower => self.cfl * h.powf(f64::max(1.0, (k + 1) as f64 / 4.0)),
            StepRule::Balanced => {
                let extra = f64::max(0.0, (2 * k + 1) as f64 / 4.0 - 1.0);
                self.cfl * h * (h / length).powf(extra)
            }
        }
    }
}

/// Upwind trace at the interface between elements `left` and `right`
/// along one axis, using modal values `ul`, `ur`.
#[inline]
fn upwind(speed: f64, ops: &ModalOperators, ul: &[f64], ur: &[f64]) -> f64 {
    if speed >= 0.0 {
        ul.iter().zip(&ops.right).map(|(u, p)| u * p).sum()
    } else {
        ur.iter().zip(&ops.left).map(|(u, p)| u * p).sum()
    }
}

/// Semi-discrete 1D DG operator with upwind flux and periodic wrap.
pub fn rhs_1d(mesh: &Mesh1D, ops: &ModalOperators, speed: f64, u: &[f64], out: &mut [f64]) {
    let p = ops.k + 1;
    let n = mesh.n;
    let scale = 2.0 / mesh.h();
    out.par_chunks_mut(p).enumerate().for_each(|(j, du)| {
        let cell = &u[j * p..(j + 1) * p];
        let prev = &u[((j + n - 1) % n) * p..][..p];
        let next = &u[((j + 1) % n) * p..][..p];
        let flux_l = speed * upwind(speed, ops, prev, cell);
        let flux_r = speed * upwind(speed, ops, cell, next);
        for m in 0..p {
            let vol: f64 = (0..p).map(|q| ops.stiffness[m * p + q] * cell[q]).sum();
            du[m] = scale * (speed * vol - flux_r * ops.right[m] + flux_l * ops.left[m]);
        }
    });
}

const MAX_MODES: usize = 16;

/// 1D element update along one axis from the (previous, own, next) lines.
#[inline]
fn axis_update<F: FnMut(usize, f64)>(
    ops: &ModalOperators,
    speed: f64,
    scale: f64,
    lines: &[[f64; MAX_MODES]; 3],
    p: usize,
    mut add: F,
) {
    let (l, c, r) = (&lines[0][..p], &lines[1][..p], &lines[2][..p]);
    let fl = speed * upwind(speed, ops, l, c);
    let fr = speed * upwind(speed, ops, c, r);
    for m in 0..p {
        let vol: f64 = (0..p).map(|n| ops.stiffness[m * p + n] * c[n]).sum();
        add(m, scale * (speed * vol - fr * ops.right[m] + fl * ops.left[m]));
    }
}

/// Tensor-product 2D operator; each axis acts like [`rhs_1d`] on the
/// modes of the other axis.
pub fn rhs_2d(mesh: &Mesh2D, ops: &ModalOperators, speed: [f64; 2], u: &[f64], out: &mut [f64]) {
    let p = ops.k + 1;
    let s = p * p;
    let (nx, ny) = (mesh.x.n, mesh.y.n);
    let (sx, sy) = (2.0 / mesh.x.h(), 2.0 / mesh.y.h());
    out.par_chunks_mut(s).enumerate().for_each(|(e, du)| {
        let (ix, iy) = (e % nx, e / nx);
        let at = |ix: usize, iy: usize| &u[mesh.index(ix, iy) * s..][..s];
        let cell = at(ix, iy);
        let west = at((ix + nx - 1) % nx, iy);
        let east = at((ix + 1) % nx, iy);
        let south = at(ix, (iy + ny - 1) % ny);
        let north = at(ix, (iy + 1) % ny);
        du.iter_mut().for_each(|d| *d = 0.0);
        let mut lines = [[0.0; MAX_MODES]; 3];
        // x-direction: for each y-mode q the row cell[q*p..] is a 1D element
        for q in 0..p {
            for (line, src) in lines.iter_mut().zip([west, cell, east]) {
                line[..p].copy_from_slice(&src[q * p..(q + 1) * p]);
            }
            axis_update(ops, speed[0], sx, &lines, p, |m, v| du[q * p + m] += v);
        }
        // y-direction: for each x-mode pp the column cell[q*p + pp] over q
        for pp in 0..p {
            for (line, src) in lines.iter_mut().zip([south, cell, north]) {
                for q in 0..p {
                    line[q] = src[q * p + pp];
                }
            }
            axis_update(ops, speed[1], sy, &lines, p, |m, v| du[m * p + pp] += v);
        }
    });
}

/// Classical RK4 from `t0` to `t_end` with a final partial step.
fn rk4<F>(u: &mut [f64], t0: f64, t_end: f64, dt: f64, rhs: F) -> Result<(), DgError>
where
    F: Fn(&[f64], &mut [f64]),
{
    let len = u.len();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    let mut stage = vec![0.0; len];
    let steps = ((t_end - t0) / dt).ceil().max(0.0) as usize;
    let mut t = t0;
    for step in 0..steps {
        let tau = if step + 1 == steps { t_end - t } else { dt };
        if tau <= 0.0 {
            break;
        }
        rhs(u, &mut k1);
        axpy(&mut stage, u, 0.5 * tau, &k1);
        rhs(&stage, &mut k2);
        axpy(&mut stage, u, 0.5 * tau, &k2);
        rhs(&stage, &mut k3);
        axpy(&mut stage, u, tau, &k3);
        rhs(&stage, &mut k4);
        let w = tau / 6.0;
        u.par_iter_mut().enumerate().for_each(|(i, v)| {
            *v += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        });
        t = if step + 1 == steps { t_end } else { t0 + (step + 1) as f64 * dt };
        if u.iter().any(|v| !v.is_finite() || v.abs() > BLOWUP) {
            return Err(DgError::Unstable { time: t });
        }
    }
    Ok(())
}

fn axpy(out: &mut [f64], u: &[f64], a: f64, k: &[f64]) {
    out.par_iter_mut().enumerate().for_each(|(i, o)| *o = u[i] + a * k[i]);
}

pub fn project_initial(problem: &AdvectionProblem, mesh: Mesh1D, k: usize) -> DGField {
    DGField::project(mesh, k, |x| problem.initial.evaluate(x, 0.0))
}

pub fn project_initial_2d(problem: &AdvectionProblem, mesh: Mesh2D, k: usize) -> DGField2D {
    DGField2D::project(mesh, k, |x, y| problem.initial.evaluate(x, y))
}

fn check(k: usize, final_time: f64, stepping: &TimeStepping) -> Result<(), DgError> {
    if k >= MAX_MODES {
        return Err(DgError::InvalidDegree(k));
    }
    if !(final_time >= 0.0 && final_time.is_finite()) {
        return Err(DgError::InvalidTime(final_time));
    }
    if !(stepping.cfl > 0.0 && stepping.cfl.is_finite()) {
        return Err(DgError::InvalidTime(stepping.cfl));
    }
    Ok(())
}

/// Advances a 1D field from its current time to `t_end`.
pub fn advance(field: &mut DGField, speed: f64, t_end: f64, stepping: &TimeStepping) -> Result<(), DgError> {
    check(field.k(), t_end - field.time(), stepping)?;
    let mesh = *field.mesh();
    let ops = ModalOperators::new(field.k());
    let dt = stepping.dt(mesh.h(), mesh.length(), field.k());
    let t0 = field.time();
    rk4(field.coefficients_mut(), t0, t_end, dt, |u, out| rhs_1d(&mesh, &ops, speed, u, out))?;
    field.set_time(t_end);
    Ok(())
}

pub fn advance_2d(field: &mut DGField2D, speed: [f64; 2], t_end: f64, stepping: &TimeStepping) -> Result<(), DgError> {
    check(field.k(), t_end - field.time(), stepping)?;
    let mesh = *field.mesh();
    let ops = ModalOperators::new(field.k());
    let h = mesh.x.h().max(mesh.y.h());
    let ratio = (mesh.x.h() / mesh.x.length()).max(mesh.y.h() / mesh.y.length());
    let dt = stepping.dt(h, h / ratio, field.k());
    let t0 = field.time();
    rk4(field.coefficients_mut(), t0, t_end, dt, |u, out| rhs_2d(&mesh, &ops, speed, u, out))?;
    field.set_time(t_end);
    Ok(())
}

/// Projection of the initial data advanced to the problem's final time.
pub fn solve(problem: &AdvectionProblem, mesh: Mesh1D, k: usize, stepping: &TimeStepping) -> Result<DGField, DgError> {
    let mut field = project_initial(problem, mesh, k);
    advance(&mut field, problem.speed[0], problem.final_time, stepping)?;
    Ok(field)
}

pub fn solve_2d(
    problem: &AdvectionProblem,
    mesh: Mesh2D,
    k: usize,
    stepping: &TimeStepping,
) -> Result<DGField2D, DgError> {
    let mut field = project_initial_2d(problem, mesh, k);
    advance_2d(&mut field, problem.speed, problem.final_time, stepping)?;
    Ok(field)
}
