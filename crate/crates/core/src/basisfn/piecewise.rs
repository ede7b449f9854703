use serde::{Deserialize, Serialize};

use super::BasisError;

/// Breakpoints closer than this are merged when new ones are generated.
pub const BREAKPOINT_MERGE_TOL: f64 = 1e-12;

/// Trigonometric factor of a [`Term`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrigPart {
    None,
    Cos,
    Sin,
}

/// `coeff * x^power * {1, cos(frequency x), sin(frequency x)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub power: u32,
    pub trig: TrigPart,
    pub frequency: f64,
    pub coeff: f64,
}

impl Term {
    pub fn poly(power: u32, coeff: f64) -> Self {
        Self { power, trig: TrigPart::None, frequency: 0.0, coeff }
    }

    pub fn cos(power: u32, frequency: f64, coeff: f64) -> Self {
        Self { power, trig: TrigPart::Cos, frequency, coeff }
    }

    pub fn sin(power: u32, frequency: f64, coeff: f64) -> Self {
        Self { power, trig: TrigPart::Sin, frequency, coeff }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let base = self.coeff * powi(x, self.power);
        match self.trig {
            TrigPart::None => base,
            TrigPart::Cos => base * (self.frequency * x).cos(),
            TrigPart::Sin => base * (self.frequency * x).sin(),
        }
    }

    /// Rewrites the term so that the frequency is positive, or drops the
    /// trig factor altogether when the frequency is zero.
    fn canonical(mut self) -> Option<Self> {
        if self.trig != TrigPart::None && self.frequency == 0.0 {
            match self.trig {
                TrigPart::Sin => return None,
                _ => self.trig = TrigPart::None,
            }
        }
        if self.trig == TrigPart::None {
            self.frequency = 0.0;
        } else if self.frequency < 0.0 {
            self.frequency = -self.frequency;
            if self.trig == TrigPart::Sin {
                self.coeff = -self.coeff;
            }
        }
        (self.coeff != 0.0).then_some(self)
    }
}

fn powi(x: f64, n: u32) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => x.powi(n as i32),
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

/// Sums like terms and removes exact zeros; the result is sorted.
pub fn normalize(terms: impl IntoIterator<Item = Term>) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    for t in terms.into_iter().filter_map(Term::canonical) {
        match out.iter_mut().find(|o| o.power == t.power && o.trig == t.trig && o.frequency == t.frequency) {
            Some(o) => o.coeff += t.coeff,
            None => out.push(t),
        }
    }
    out.retain(|t| t.coeff != 0.0);
    out.sort_by(|a, b| (a.trig as u8, a.power).cmp(&(b.trig as u8, b.power)).then(a.frequency.total_cmp(&b.frequency)));
    out
}

fn eval_terms(terms: &[Term], x: f64) -> f64 {
    terms.iter().map(|t| t.eval(x)).sum()
}

/// Indefinite integral (zero constant) of a single term.
fn antiderivative_term(t: Term) -> Vec<Term> {
    let Term { power: n, trig, frequency: w, coeff: c } = t;
    match trig {
        TrigPart::None => vec![Term::poly(n + 1, c / (n + 1) as f64)],
        // ∫x^n cos(wx) = x^n sin(wx)/w - (n/w) ∫x^(n-1) sin(wx)
        TrigPart::Cos => {
            let mut out = vec![Term::sin(n, w, c / w)];
            if n > 0 {
                out.extend(antiderivative_term(Term::sin(n - 1, w, -c * n as f64 / w)));
            }
            out
        }
        // ∫x^n sin(wx) = -x^n cos(wx)/w + (n/w) ∫x^(n-1) cos(wx)
        TrigPart::Sin => {
            let mut out = vec![Term::cos(n, w, -c / w)];
            if n > 0 {
                out.extend(antiderivative_term(Term::cos(n - 1, w, c * n as f64 / w)));
            }
            out
        }
    }
}

pub(crate) fn antiderivative(terms: &[Term]) -> Vec<Term> {
    normalize(terms.iter().flat_map(|&t| antiderivative_term(t)))
}

fn derivative_terms(terms: &[Term]) -> Vec<Term> {
    let mut out = Vec::new();
    for &Term { power: n, trig, frequency: w, coeff: c } in terms {
        if n > 0 {
            out.push(Term { power: n - 1, trig, frequency: w, coeff: c * n as f64 });
        }
        match trig {
            TrigPart::None => {}
            TrigPart::Cos => out.push(Term::sin(n, w, -c * w)),
            TrigPart::Sin => out.push(Term::cos(n, w, c * w)),
        }
    }
    normalize(out)
}

/// Terms of `x -> f(x + shift)`.
pub(crate) fn translate(terms: &[Term], shift: f64) -> Vec<Term> {
    let mut out = Vec::new();
    for &Term { power: n, trig, frequency: w, coeff: c } in terms {
        // (x+s)^n = sum_i C(n,i) s^(n-i) x^i
        let (ss, cs) = (w * shift).sin_cos();
        for i in 0..=n {
            let a = c * binomial(n, i) * powi(shift, n - i);
            match trig {
                TrigPart::None => out.push(Term::poly(i, a)),
                // cos(wx + ws) = cos(wx)cos(ws) - sin(wx)sin(ws)
                TrigPart::Cos => {
                    out.push(Term::cos(i, w, a * cs));
                    out.push(Term::sin(i, w, -a * ss));
                }
                // sin(wx + ws) = sin(wx)cos(ws) + cos(wx)sin(ws)
                TrigPart::Sin => {
                    out.push(Term::sin(i, w, a * cs));
                    out.push(Term::cos(i, w, a * ss));
                }
            }
        }
    }
    normalize(out)
}

fn scale(terms: &[Term], factor: f64) -> Vec<Term> {
    normalize(terms.iter().map(|t| Term { coeff: t.coeff * factor, ..*t }))
}

/// Compactly supported function given as trig-polynomial pieces on a
/// strictly increasing breakpoint list. Zero outside the support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiecewise", into = "RawPiecewise")]
pub struct PiecewiseFunction {
    breakpoints: Vec<f64>,
    pieces: Vec<Vec<Term>>,
}

#[derive(Serialize, Deserialize)]
struct RawPiecewise {
    breakpoints: Vec<f64>,
    pieces: Vec<Vec<Term>>,
}

impl TryFrom<RawPiecewise> for PiecewiseFunction {
    type Error = BasisError;
    fn try_from(raw: RawPiecewise) -> Result<Self, Self::Error> {
        PiecewiseFunction::new(raw.breakpoints, raw.pieces)
    }
}

impl From<PiecewiseFunction> for RawPiecewise {
    fn from(f: PiecewiseFunction) -> Self {
        RawPiecewise { breakpoints: f.breakpoints, pieces: f.pieces }
    }
}

enum Region {
    Left,
    Piece(usize),
    Right,
}

impl PiecewiseFunction {
    /// Validates and builds a function; the terms of each piece are kept as
    /// given (no normalization) so that serialized payloads round-trip.
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Vec<Term>>) -> Result<Self, BasisError> {
        if breakpoints.is_empty() && pieces.is_empty() {
            return Ok(Self::zero());
        }
        if breakpoints.len() != pieces.len() + 1 {
            return Err(BasisError::Malformed(format!(
                "{} breakpoints for {} pieces",
                breakpoints.len(),
                pieces.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(BasisError::Malformed("non-finite breakpoint".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BasisError::Malformed("breakpoints must be strictly increasing".into()));
        }
        Ok(Self { breakpoints, pieces })
    }

    /// The identically zero function (empty support).
    pub fn zero() -> Self {
        Self { breakpoints: Vec::new(), pieces: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| p.is_empty())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Vec<Term>] {
        &self.pieces
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        Some((*self.breakpoints.first()?, *self.breakpoints.last()?))
    }

    pub fn support_width(&self) -> f64 {
        self.support().map_or(0.0, |(a, b)| b - a)
    }

    /// True when every term is a plain polynomial.
    pub fn is_polynomial(&self) -> bool {
        self.pieces.iter().flatten().all(|t| t.trig == TrigPart::None)
    }

    /// Largest monomial power appearing in any piece.
    pub fn max_power(&self) -> u32 {
        self.pieces.iter().flatten().map(|t| t.power).max().unwrap_or(0)
    }

    fn locate(&self, x: f64) -> Region {
        let n = self.breakpoints.len();
        if n == 0 || x < self.breakpoints[0] {
            return Region::Left;
        }
        if x > self.breakpoints[n - 1] {
            return Region::Right;
        }
        if x == self.breakpoints[n - 1] {
            return Region::Piece(n - 2);
        }
        // last breakpoint <= x
        let idx = self.breakpoints.partition_point(|&b| b <= x) - 1;
        Region::Piece(idx)
    }

    /// Value at `x`: the right piece at interior breakpoints, the left piece
    /// at the right end of the support, zero outside.
    pub fn evaluate(&self, x: f64) -> f64 {
        match self.locate(x) {
            Region::Piece(i) => eval_terms(&self.pieces[i], x),
            _ => 0.0,
        }
    }

    /// `∫ f(ξ - shift) ξ^j dξ` in closed form.
    pub fn moment(&self, j: u32, shift: f64) -> f64 {
        // ∫ f(t) (t + shift)^j dt, expanded binomially
        let mut total = 0.0;
        for (i, piece) in self.pieces.iter().enumerate() {
            let (a, b) = (self.breakpoints[i], self.breakpoints[i + 1]);
            let mut weighted = Vec::new();
            for p in 0..=j {
                let w = binomial(j, p) * powi(shift, j - p);
                weighted.extend(piece.iter().map(|t| Term { power: t.power + p, coeff: t.coeff * w, ..*t }));
            }
            let anti = antiderivative(&normalize(weighted));
            total += eval_terms(&anti, b) - eval_terms(&anti, a);
        }
        total
    }

    pub fn integral(&self) -> f64 {
        self.moment(0, 0.0)
    }

    /// Piecewise derivative (breakpoint jumps are ignored).
    pub fn derivative(&self) -> PiecewiseFunction {
        Self {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|p| derivative_terms(p)).collect(),
        }
    }

    /// `x -> f(x - offset)`.
    pub fn shifted(&self, offset: f64) -> PiecewiseFunction {
        Self {
            breakpoints: self.breakpoints.iter().map(|b| b + offset).collect(),
            pieces: self.pieces.iter().map(|p| translate(p, -offset)).collect(),
        }
    }

    /// `x -> factor * f(x)`.
    pub fn scaled(&self, factor: f64) -> PiecewiseFunction {
        Self { breakpoints: self.breakpoints.clone(), pieces: self.pieces.iter().map(|p| scale(p, factor)).collect() }
    }

    /// Exact convolution with the unit box `χ_[-1/2, 1/2]`:
    /// `(f ⋆ χ)(x) = F(x + 1/2) - F(x - 1/2)` with `F` the running integral.
    pub fn convolve_with_box(&self) -> PiecewiseFunction {
        if self.breakpoints.is_empty() {
            return Self::zero();
        }
        // running integral F, piece by piece, continuous across breakpoints
        let mut running = Vec::with_capacity(self.pieces.len());
        let mut acc = 0.0;
        for (i, piece) in self.pieces.iter().enumerate() {
            let (a, b) = (self.breakpoints[i], self.breakpoints[i + 1]);
            let mut anti = antiderivative(piece);
            let offset = acc - eval_terms(&anti, a);
            acc += eval_terms(&anti, b) - eval_terms(&anti, a);
            anti.push(Term::poly(0, offset));
            running.push(normalize(anti));
        }
        let total = acc;
        let running_at = |x: f64| -> Vec<Term> {
            match self.locate(x) {
                Region::Left => Vec::new(),
                Region::Piece(i) => running[i].clone(),
                Region::Right => vec![Term::poly(0, total)],
            }
        };

        let mut candidates: Vec<f64> = self.breakpoints.iter().flat_map(|&b| [b - 0.5, b + 0.5]).collect();
        candidates.sort_by(f64::total_cmp);
        let mut breakpoints: Vec<f64> = Vec::with_capacity(candidates.len());
        for c in candidates {
            match breakpoints.last() {
                Some(&last) if (c - last).abs() <= BREAKPOINT_MERGE_TOL => {}
                _ => breakpoints.push(c),
            }
        }

        let pieces = breakpoints
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let plus = translate(&running_at(mid + 0.5), 0.5);
                let minus = translate(&running_at(mid - 0.5), -0.5);
                normalize(plus.into_iter().chain(minus.into_iter().map(|t| Term { coeff: -t.coeff, ..t })))
            })
            .collect();
        Self { breakpoints, pieces }
    }
}
