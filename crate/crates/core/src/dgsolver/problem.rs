use serde::{Deserialize, Serialize};

/// Initial data `u_0(x, y)`; 1D problems evaluate with `y = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Profile {
    /// `sin(kx·x + ky·y + phase)`.
    Sine {
        kx: f64,
        #[serde(default)]
        ky: f64,
        #[serde(default)]
        phase: f64,
    },
    Constant {
        value: f64,
    },
    /// `Σ c_i x^i`; only meaningful for projection tests (not periodic).
    Polynomial {
        coefficients: Vec<f64>,
    },
}

impl Profile {
    /// `sin(2πx)`.
    pub fn unit_sine() -> Self {
        Profile::Sine { kx: 2.0 * std::f64::consts::PI, ky: 0.0, phase: 0.0 }
    }

    /// `sin(x + y)`.
    pub fn diagonal_sine() -> Self {
        Profile::Sine { kx: 1.0, ky: 1.0, phase: 0.0 }
    }

    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        match self {
            Profile::Sine { kx, ky, phase } => (kx * x + ky * y + phase).sin(),
            Profile::Constant { value } => *value,
            Profile::Polynomial { coefficients } => coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }
}

/// `u_t + a·∇u = 0` with periodic boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvectionProblem {
    /// `(a_x, a_y)`; `a_y` is ignored in 1D.
    pub speed: [f64; 2],
    pub initial: Profile,
    pub final_time: f64,
}

impl AdvectionProblem {
    pub fn one_d(speed: f64, initial: Profile, final_time: f64) -> Self {
        Self { speed: [speed, 0.0], initial, final_time }
    }

    /// Unit speed along both axes.
    pub fn two_d(initial: Profile, final_time: f64) -> Self {
        Self { speed: [1.0, 1.0], initial, final_time }
    }

    /// `sin(2πx)` on `[0, 1]`, unit speed, `T = 1`.
    pub fn sine_wave() -> Self {
        Self::one_d(1.0, Profile::unit_sine(), 1.0)
    }

    /// `sin(x + y)` on `[0, 2π]²`, `T = 2π`.
    pub fn diagonal_wave() -> Self {
        Self::two_d(Profile::diagonal_sine(), 2.0 * std::f64::consts::PI)
    }

    /// Exact solution; the caller wraps coordinates for non-periodic profiles.
    pub fn exact(&self, x: f64, y: f64, t: f64) -> f64 {
        self.initial.evaluate(x - self.speed[0] * t, y - self.speed[1] * t)
    }

    pub fn exact_1d(&self, x: f64, t: f64) -> f64 {
        self.exact(x, 0.0, t)
    }
}
