use serde::{Deserialize, Serialize};

use super::DgError;

/// Relative distance below which a point is snapped onto an element interface.
const INTERFACE_SNAP: f64 = 1e-12;

/// Uniform 1D mesh of `n` elements on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh1D {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    #[serde(default = "yes")]
    pub periodic: bool,
}

fn yes() -> bool {
    true
}

impl Mesh1D {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self, DgError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(DgError::InvalidMesh(format!("bad bounds [{a}, {b}]")));
        }
        if n == 0 {
            return Err(DgError::InvalidMesh("need at least one element".into()));
        }
        Ok(Self { a, b, n, periodic: true })
    }

    /// `[0, 1]` with `n` elements.
    pub fn unit(n: usize) -> Result<Self, DgError> {
        Self::new(0.0, 1.0, n)
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    /// `x_{j-1/2}`.
    pub fn left(&self, j: usize) -> f64 {
        self.a + j as f64 * self.h()
    }

    pub fn center(&self, j: usize) -> f64 {
        self.a + (j as f64 + 0.5) * self.h()
    }

    /// Reference coordinate `r ∈ [-1, 1]` of `x` in element `j`.
    pub fn to_reference(&self, j: usize, x: f64) -> f64 {
        2.0 * (x - self.center(j)) / self.h()
    }

    pub fn from_reference(&self, j: usize, r: f64) -> f64 {
        self.center(j) + 0.5 * self.h() * r
    }

    /// Periodic image of `x` in `[a, b)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let w = self.a + (x - self.a).rem_euclid(self.length());
        if w >= self.b {
            self.a
        } else {
            w
        }
    }

    /// Element containing `x` and its reference coordinate. Points on an
    /// interface belong to the element on their right; `x` is wrapped first.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let s = (self.wrap(x) - self.a) / self.h();
        let nearest = s.round();
        if (s - nearest).abs() <= INTERFACE_SNAP * nearest.abs().max(1.0) {
            let j = nearest as usize % self.n;
            return (j, -1.0);
        }
        let j = (s.floor() as usize).min(self.n - 1);
        (j, 2.0 * (s - j as f64) - 1.0)
    }
}

/// Tensor mesh of two 1D meshes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh2D {
    pub x: Mesh1D,
    pub y: Mesh1D,
}

impl Mesh2D {
    pub fn new(x: Mesh1D, y: Mesh1D) -> Self {
        Self { x, y }
    }

    /// `[a, b]²` with `n × n` elements.
    pub fn square(a: f64, b: f64, n: usize) -> Result<Self, DgError> {
        let m = Mesh1D::new(a, b, n)?;
        Ok(Self { x: m, y: m })
    }

    pub fn elements(&self) -> usize {
        self.x.n * self.y.n
    }

    /// Element-major index, x fastest.
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.x.n + ix
    }
}
