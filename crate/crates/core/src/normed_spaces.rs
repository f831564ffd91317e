//! Finite-dimensional normed spaces and numerical moduli of convexity/smoothness.
//!
//! A [`NormSpec`] is `x -> ||T x||_p` on `R^d` or `C^d`. Complex coordinates only
//! enter through their moduli, so searches over the unit sphere run on the
//! realification `R^{2d}`.
//!
//! The moduli are extremal problems over pairs of unit vectors. The searches
//! below only ever evaluate admissible pairs, so the convexity estimate is an
//! upper bound of `delta(eps)` and the smoothness estimate is a lower bound of
//! `rho(t)`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("exponent p must lie in [1, inf], got {0}")]
    InvalidExponent(f64),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("transform must be {expected}x{expected}, got {rows}x{cols}")]
    TransformShape {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("transform is singular or numerically singular (condition number {0:e})")]
    SingularTransform(f64),
    #[error("vector has dimension {got}, space has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("eps must lie in (0, 2), got {0}")]
    InfeasibleEpsilon(f64),
    #[error("t must be positive and finite, got {0}")]
    InvalidT(f64),
    #[error("power-type fit needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("degenerate modulus: estimate {value:e} at abscissa {abscissa} is not positive")]
    DegenerateModulus { abscissa: f64, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScalarField {
    Real,
    #[default]
    Complex,
}

/// Exponent in `[1, inf]`; serialized as a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(pub f64);

impl Exponent {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Some(Exponent(f64::INFINITY)),
            other => other.parse::<f64>().ok().map(Exponent),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Exponent(x)),
            Raw::Str(s) => Exponent::parse(&s)
                .ok_or_else(|| serde::de::Error::custom(format!("bad exponent {s:?}"))),
        }
    }
}

/// The `{p, d}` part of a space, as it appears in serialized documents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    pub p: Exponent,
    pub d: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormSpec {
    p: f64,
    d: usize,
    transform: Option<DMatrix<f64>>,
    field: ScalarField,
}

/// Condition numbers above this are treated as singular.
const MAX_CONDITION: f64 = 1e12;

/// Builds `l^p_d` (complex coordinates), optionally renormed by `transform`.
pub fn make_space(
    p: f64,
    d: usize,
    transform: Option<DMatrix<f64>>,
) -> Result<NormSpec, NormError> {
    NormSpec::new(p, d, transform, ScalarField::Complex)
}

impl NormSpec {
    pub fn new(
        p: f64,
        d: usize,
        transform: Option<DMatrix<f64>>,
        field: ScalarField,
    ) -> Result<Self, NormError> {
        if p.is_nan() || p < 1.0 {
            return Err(NormError::InvalidExponent(p));
        }
        if d == 0 {
            return Err(NormError::ZeroDimension);
        }
        if let Some(t) = &transform {
            if t.nrows() != d || t.ncols() != d {
                return Err(NormError::TransformShape {
                    expected: d,
                    rows: t.nrows(),
                    cols: t.ncols(),
                });
            }
            let sv = t.singular_values();
            let smax = sv.max();
            let smin = sv.min();
            let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
            if !cond.is_finite() || cond > MAX_CONDITION || t.iter().any(|x| !x.is_finite()) {
                return Err(NormError::SingularTransform(cond));
            }
        }
        Ok(NormSpec {
            p,
            d,
            transform,
            field,
        })
    }

    /// `l^p_d` with complex coordinates and no transform.
    pub fn lp(p: f64, d: usize) -> Result<Self, NormError> {
        make_space(p, d, None)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn field(&self) -> ScalarField {
        self.field
    }

    pub fn transform(&self) -> Option<&DMatrix<f64>> {
        self.transform.as_ref()
    }

    pub fn descriptor(&self) -> SpaceDescriptor {
        SpaceDescriptor {
            p: Exponent(self.p),
            d: self.d,
        }
    }

    pub fn is_hilbert(&self) -> bool {
        self.p == 2.0 && self.transform.is_none()
    }

    /// Number of real coordinates seen by the moduli searches.
    pub fn real_dim(&self) -> usize {
        match self.field {
            ScalarField::Real => self.d,
            ScalarField::Complex => 2 * self.d,
        }
    }

    pub fn norm(&self, v: &[Complex64]) -> Result<f64, NormError> {
        if v.len() != self.d {
            return Err(NormError::DimensionMismatch {
                expected: self.d,
                got: v.len(),
            });
        }
        Ok(self.norm_unchecked(v))
    }

    /// Norm without the dimension check; `v.len()` must equal `dim()`.
    pub fn norm_unchecked(&self, v: &[Complex64]) -> f64 {
        match &self.transform {
            None => scaled_pnorm(self.p, v.len(), |i| v[i].norm()),
            Some(t) => scaled_pnorm(self.p, self.d, |i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, vj) in v.iter().enumerate() {
                    acc += vj * t[(i, j)];
                }
                acc.norm()
            }),
        }
    }

    /// Norm of a realified vector: `d` reals for a real field, `d` (re, im)
    /// pairs for a complex field.
    pub fn norm_real(&self, x: &[f64]) -> Result<f64, NormError> {
        if x.len() != self.real_dim() {
            return Err(NormError::DimensionMismatch {
                expected: self.real_dim(),
                got: x.len(),
            });
        }
        Ok(self.norm_real_unchecked(x))
    }

    fn norm_real_unchecked(&self, x: &[f64]) -> f64 {
        let complex = self.field == ScalarField::Complex;
        let coord = |j: usize| -> (f64, f64) {
            if complex {
                (x[2 * j], x[2 * j + 1])
            } else {
                (x[j], 0.0)
            }
        };
        match &self.transform {
            None => scaled_pnorm(self.p, self.d, |i| {
                let (re, im) = coord(i);
                re.hypot(im)
            }),
            Some(t) => scaled_pnorm(self.p, self.d, |i| {
                let (mut re, mut im) = (0.0, 0.0);
                for j in 0..self.d {
                    let (a, b) = coord(j);
                    re += t[(i, j)] * a;
                    im += t[(i, j)] * b;
                }
                re.hypot(im)
            }),
        }
    }
}

/// `(sum |y_i|^p)^(1/p)` computed as `m (sum (|y_i|/m)^p)^(1/p)` with `m = max |y_i|`,
/// so that scaling all moduli by a power of two scales the result exactly.
fn scaled_pnorm<F: Fn(usize) -> f64>(p: f64, n: usize, modulus: F) -> f64 {
    let mut m = 0.0f64;
    for i in 0..n {
        m = m.max(modulus(i));
    }
    if m == 0.0 || p.is_infinite() || !m.is_finite() {
        return m;
    }
    let mut s = 0.0;
    if p == 1.0 {
        for i in 0..n {
            s += modulus(i) / m;
        }
        m * s
    } else if p == 2.0 {
        for i in 0..n {
            let r = modulus(i) / m;
            s += r * r;
        }
        m * s.sqrt()
    } else {
        for i in 0..n {
            s += (modulus(i) / m).powf(p);
        }
        m * s.powf(1.0 / p)
    }
}

/// Effort of a multistart search. Start `k` is driven by its own generator
/// seeded from `seed + k`, so enlarging `starts` or `sweeps` only extends the
/// set of evaluated pairs and the estimates are monotone in the budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub starts: usize,
    pub sweeps: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            starts: 64,
            sweeps: 200,
            seed: 0x5eed,
        }
    }
}

const BISECTION_TOL: f64 = 1e-10;
const MIN_STEP: f64 = 1e-11;

fn normalized(space: &NormSpec, x: &[f64], out: &mut [f64]) -> bool {
    let n = space.norm_real_unchecked(x);
    if !(n > 0.0) || !n.is_finite() {
        return false;
    }
    for (o, xi) in out.iter_mut().zip(x) {
        *o = xi / n;
    }
    true
}

/// Scratch for one convexity evaluation.
struct ChordWork {
    a: Vec<f64>,
    u: Vec<f64>,
    b: Vec<f64>,
    tmp: Vec<f64>,
}

impl ChordWork {
    fn new(n: usize) -> Self {
        ChordWork {
            a: vec![0.0; n],
            u: vec![0.0; n],
            b: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }
}

/// `1 - ||(a+b)/2||` for `a = x/||x||` and `b` the point on the great-circle arc
/// `normalize(a cos s + u sin s)` with `||a - b|| = eps` (to the bisection tolerance).
/// Returns `None` when the pair is degenerate.
fn chord_objective(
    space: &NormSpec,
    x: &[f64],
    u_raw: &[f64],
    eps: f64,
    w: &mut ChordWork,
) -> Option<f64> {
    if !normalized(space, x, &mut w.a) || !normalized(space, u_raw, &mut w.u) {
        return None;
    }
    let dist_at = |s: f64, w: &mut ChordWork| -> Option<f64> {
        let (sn, cs) = s.sin_cos();
        for i in 0..w.a.len() {
            w.b[i] = w.a[i] * cs + w.u[i] * sn;
        }
        let n = space.norm_real_unchecked(&w.b);
        if !(n > 0.0) {
            return None;
        }
        for bi in w.b.iter_mut() {
            *bi /= n;
        }
        for i in 0..w.a.len() {
            w.tmp[i] = w.a[i] - w.b[i];
        }
        Some(space.norm_real_unchecked(&w.tmp))
    };
    let (mut lo, mut hi) = (0.0f64, std::f64::consts::PI);
    let mut dist = dist_at(hi, w)?;
    if dist < eps {
        return None;
    }
    for _ in 0..200 {
        let s = 0.5 * (lo + hi);
        dist = dist_at(s, w)?;
        if (dist - eps).abs() <= BISECTION_TOL {
            break;
        }
        if dist < eps {
            lo = s;
        } else {
            hi = s;
        }
    }
    if (dist - eps).abs() > BISECTION_TOL {
        return None;
    }
    for i in 0..w.a.len() {
        w.tmp[i] = 0.5 * (w.a[i] + w.b[i]);
    }
    Some(1.0 - space.norm_real_unchecked(&w.tmp))
}

fn smooth_objective(space: &NormSpec, x: &[f64], y: &[f64], t: f64, w: &mut ChordWork) -> Option<f64> {
    if !normalized(space, x, &mut w.a) || !normalized(space, y, &mut w.u) {
        return None;
    }
    for i in 0..w.a.len() {
        w.tmp[i] = w.a[i] + t * w.u[i];
        w.b[i] = w.a[i] - t * w.u[i];
    }
    Some(0.5 * (space.norm_real_unchecked(&w.tmp) + space.norm_real_unchecked(&w.b)) - 1.0)
}

/// Initial raw pair for start `k`. The first two starts are axis-aligned pairs,
/// which are the extremal configurations of the polyhedral norms.
fn start_pair(n: usize, k: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let step = if n >= 4 && n % 2 == 0 && k < 2 { 2 } else { 1 };
    match k {
        0 if n >= 2 => {
            x[0] = 1.0;
            y[step.min(n - 1)] = 1.0;
        }
        1 if n >= 2 => {
            for i in (0..n).step_by(step) {
                x[i] = 1.0;
            }
            y[0] = 1.0;
            y[step.min(n - 1)] = -1.0;
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            for v in x.iter_mut().chain(y.iter_mut()) {
                *v = rng.sample(StandardNormal);
            }
        }
    }
    (x, y)
}

/// Coordinate descent on the raw pair `(x, y)` minimising `objective`.
/// Steps are relative to the current coordinate scale and halve after a sweep
/// without improvement.
fn coordinate_descent<F>(x: &mut [f64], y: &mut [f64], sweeps: usize, mut objective: F) -> Option<f64>
where
    F: FnMut(&[f64], &[f64]) -> Option<f64>,
{
    let mut best = objective(x, y)?;
    let n = x.len();
    let mut step = 0.5;
    for _ in 0..sweeps {
        if step < MIN_STEP {
            break;
        }
        let mut improved = false;
        for coord in 0..2 * n {
            for dir in [1.0, -1.0] {
                let (vec, i) = if coord < n { (&mut *x, coord) } else { (&mut *y, coord - n) };
                let old = vec[i];
                vec[i] = old + dir * step;
                match objective(x, y) {
                    Some(v) if v < best => {
                        best = v;
                        improved = true;
                        break;
                    }
                    _ => {
                        let vec = if coord < n { &mut *x } else { &mut *y };
                        vec[i] = old;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Some(best)
}

/// Upper-biased estimate of `delta(eps) = inf {1 - ||(a+b)/2|| : ||a|| = ||b|| = 1, ||a-b|| = eps}`.
pub fn modulus_convexity(space: &NormSpec, eps: f64, budget: &SearchBudget) -> Result<f64, NormError> {
    if !(eps > 0.0 && eps < 2.0) {
        return Err(NormError::InfeasibleEpsilon(eps));
    }
    let n = space.real_dim();
    let mut work = ChordWork::new(n);
    let mut best = 1.0f64;
    for k in 0..budget.starts {
        let (mut x, mut u) = start_pair(n, k, budget.seed);
        let found = coordinate_descent(&mut x, &mut u, budget.sweeps, |x, u| {
            chord_objective(space, x, u, eps, &mut work)
        });
        if let Some(v) = found {
            best = best.min(v);
        }
    }
    Ok(best.clamp(0.0, 1.0))
}

/// Lower-biased estimate of `rho(t) = sup {(||a+tb|| + ||a-tb||)/2 - 1 : ||a|| = ||b|| = 1}`.
pub fn modulus_smoothness(space: &NormSpec, t: f64, budget: &SearchBudget) -> Result<f64, NormError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(NormError::InvalidT(t));
    }
    let n = space.real_dim();
    let mut work = ChordWork::new(n);
    let mut best = 0.0f64;
    for k in 0..budget.starts {
        let (mut x, mut y) = start_pair(n, k, budget.seed);
        let found = coordinate_descent(&mut x, &mut y, budget.sweeps, |x, y| {
            smooth_objective(space, x, y, t, &mut work).map(|v| -v)
        });
        if let Some(v) = found {
            best = best.max(-v);
        }
    }
    Ok(best.clamp(0.0, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveSide {
    /// Estimates bound the true modulus from above (convexity).
    UpperBiased,
    /// Estimates bound the true modulus from below (smoothness).
    LowerBiased,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusCurve {
    pub abscissae: Vec<f64>,
    pub estimates: Vec<f64>,
    pub side: CurveSide,
    pub budget: SearchBudget,
}

impl ModulusCurve {
    /// Monotone cleanup that keeps the one-sided semantics: an upper bound at a
    /// larger abscissa also bounds every smaller one (suffix minimum); a lower
    /// bound at a smaller abscissa also bounds every larger one (prefix maximum).
    /// Abscissae must be ascending.
    pub fn isotonic(mut self) -> Self {
        match self.side {
            CurveSide::UpperBiased => {
                for i in (0..self.estimates.len().saturating_sub(1)).rev() {
                    self.estimates[i] = self.estimates[i].min(self.estimates[i + 1]);
                }
            }
            CurveSide::LowerBiased => {
                for i in 1..self.estimates.len() {
                    self.estimates[i] = self.estimates[i].max(self.estimates[i - 1]);
                }
            }
        }
        self
    }
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

pub fn convexity_curve(space: &NormSpec, eps: &[f64], budget: &SearchBudget) -> Result<ModulusCurve, NormError> {
    let abscissae = sorted(eps);
    let estimates = abscissae
        .iter()
        .map(|&e| modulus_convexity(space, e, budget))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ModulusCurve {
        abscissae,
        estimates,
        side: CurveSide::UpperBiased,
        budget: *budget,
    }
    .isotonic())
}

pub fn smoothness_curve(space: &NormSpec, ts: &[f64], budget: &SearchBudget) -> Result<ModulusCurve, NormError> {
    let abscissae = sorted(ts);
    let estimates = abscissae
        .iter()
        .map(|&t| modulus_smoothness(space, t, budget))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ModulusCurve {
        abscissae,
        estimates,
        side: CurveSide::LowerBiased,
        budget: *budget,
    }
    .isotonic())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub coefficient: f64,
    /// Root-mean-square residual of the log-log regression.
    pub residual: f64,
}

/// Estimates below this are treated as zero by [`power_type_fit`].
pub const DEGENERATE_THRESHOLD: f64 = 1e-9;

/// Least-squares fit of `log est = log c + q log x`.
pub fn power_type_fit(curve: &ModulusCurve) -> Result<PowerFit, NormError> {
    let n = curve.abscissae.len().min(curve.estimates.len());
    if n < 4 {
        return Err(NormError::TooFewPoints(n));
    }
    for (&x, &e) in curve.abscissae.iter().zip(&curve.estimates) {
        if !(e > DEGENERATE_THRESHOLD) {
            return Err(NormError::DegenerateModulus { abscissa: x, value: e });
        }
    }
    let xs: Vec<f64> = curve.abscissae[..n].iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = curve.estimates[..n].iter().map(|y| y.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(PowerFit {
        exponent: slope,
        coefficient: intercept.exp(),
        residual: (rss / n as f64).sqrt(),
    })
}

/// Ordinary least squares `y = intercept + slope x`; returns `(slope, intercept)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}
