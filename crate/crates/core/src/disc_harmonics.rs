//! Vector-valued trigonometric polynomials and their harmonic extensions to the disc.
//!
//! `f(e^{i theta}) = sum_k a_k e^{i k theta}` with `a_k` in `C^d` extends to
//! `f(z) = sum_{k>=0} a_k z^k + sum_{k<0} a_k conj(z)^{|k|}`. Everything here is
//! evaluated from the coefficients: extensions and gradients are exact series,
//! and ring samples come from an inverse FFT of the (aliased) coefficient bins.
//!
//! Coefficients are stored sparsely by `|k|`, which keeps lacunary polynomials
//! of large degree cheap.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normed_spaces::{NormSpec, SpaceDescriptor};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Largest lacunary length accepted by [`lacunary_polynomial`] (degree `2^20`).
pub const MAX_LACUNARY_TERMS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscError {
    #[error("point {0} lies outside the closed unit disc")]
    OutsideDisc(Complex64),
    #[error("gradient requested at boundary point {0}")]
    BoundaryGradient(Complex64),
    #[error("expected coefficient vectors of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("lacunary length {0} exceeds the supported maximum {MAX_LACUNARY_TERMS}")]
    LacunaryTooLong(usize),
    #[error("malformed polynomial document: {0}")]
    Malformed(String),
}

/// A point of the closed unit disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscPoint(Complex64);

impl DiscPoint {
    pub fn new(z: Complex64) -> Result<Self, DiscError> {
        if !(z.norm() <= 1.0 + 1e-14) {
            return Err(DiscError::OutsideDisc(z));
        }
        Ok(DiscPoint(z))
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self, DiscError> {
        Self::new(Complex64::from_polar(r, theta))
    }

    pub fn z(self) -> Complex64 {
        self.0
    }

    pub fn is_interior(self) -> bool {
        self.0.norm() < 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientValue {
    pub dx: Vec<Complex64>,
    pub dy: Vec<Complex64>,
    pub dr: Option<Vec<Complex64>>,
}

impl GradientValue {
    /// `||df/dx|| + ||df/dy||`.
    pub fn norm(&self, space: &NormSpec) -> f64 {
        space.norm_unchecked(&self.dx) + space.norm_unchecked(&self.dy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    dim: usize,
    /// Distinct `|k|`, ascending.
    freqs: Vec<u64>,
    /// Coefficient of `e^{+ik theta}`, `dim` entries per frequency.
    pos: Vec<Complex64>,
    /// Coefficient of `e^{-ik theta}`; zero for `k = 0`.
    neg: Vec<Complex64>,
}

impl TrigPolynomial {
    pub fn zero(dim: usize) -> Self {
        TrigPolynomial {
            dim,
            freqs: Vec::new(),
            pos: Vec::new(),
            neg: Vec::new(),
        }
    }

    /// Builds from `(k, a_k)` terms; repeated frequencies are summed.
    pub fn from_terms(dim: usize, terms: &[(i64, Vec<Complex64>)]) -> Result<Self, DiscError> {
        let mut sorted: Vec<&(i64, Vec<Complex64>)> = terms.iter().collect();
        sorted.sort_by_key(|(k, _)| k.unsigned_abs());
        let mut out = TrigPolynomial::zero(dim);
        for (k, a) in sorted {
            if a.len() != dim {
                return Err(DiscError::DimensionMismatch {
                    expected: dim,
                    got: a.len(),
                });
            }
            let f = k.unsigned_abs();
            if out.freqs.last() != Some(&f) {
                out.freqs.push(f);
                out.pos.extend(std::iter::repeat_n(ZERO, dim));
                out.neg.extend(std::iter::repeat_n(ZERO, dim));
            }
            let base = (out.freqs.len() - 1) * dim;
            let target = if *k >= 0 { &mut out.pos } else { &mut out.neg };
            for (c, v) in a.iter().enumerate() {
                target[base + c] += v;
            }
        }
        Ok(out)
    }

    /// Builds from a dense list `a_{-N}, ..., a_N`.
    pub fn from_dense(dim: usize, coefficients: &[Vec<Complex64>]) -> Result<Self, DiscError> {
        if coefficients.len() % 2 != 1 {
            return Err(DiscError::Malformed(format!(
                "dense coefficient list must have odd length 2N+1, got {}",
                coefficients.len()
            )));
        }
        let n = (coefficients.len() / 2) as i64;
        let terms: Vec<(i64, Vec<Complex64>)> = coefficients
            .iter()
            .enumerate()
            .map(|(i, a)| (i as i64 - n, a.clone()))
            .collect();
        Self::from_terms(dim, &terms)
    }

    /// Constant polynomial.
    pub fn constant(a0: Vec<Complex64>) -> Self {
        let dim = a0.len();
        Self::from_terms(dim, &[(0, a0)]).expect("dimension is consistent")
    }

    /// `a * w^k` for `k >= 0`, `a * conj(w)^{|k|}` for `k < 0`.
    pub fn monomial(k: i64, a: Vec<Complex64>) -> Self {
        let dim = a.len();
        Self::from_terms(dim, &[(k, a)]).expect("dimension is consistent")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u64 {
        self.freqs
            .iter()
            .enumerate()
            .rev()
            .find(|(i, _)| !self.block_is_zero(*i))
            .map(|(_, &f)| f)
            .unwrap_or(0)
    }

    fn block_is_zero(&self, i: usize) -> bool {
        let r = i * self.dim..(i + 1) * self.dim;
        self.pos[r.clone()].iter().all(|c| *c == ZERO) && self.neg[r].iter().all(|c| *c == ZERO)
    }

    pub fn is_zero(&self) -> bool {
        (0..self.freqs.len()).all(|i| self.block_is_zero(i))
    }

    pub fn is_analytic(&self) -> bool {
        self.neg.iter().all(|c| *c == ZERO)
    }

    /// `a_k` (zero vector when absent).
    pub fn coefficient(&self, k: i64) -> Vec<Complex64> {
        match self.freqs.binary_search(&k.unsigned_abs()) {
            Ok(i) => {
                let src = if k >= 0 { &self.pos } else { &self.neg };
                src[i * self.dim..(i + 1) * self.dim].to_vec()
            }
            Err(_) => vec![ZERO; self.dim],
        }
    }

    /// Nonzero terms `(k, a_k)` in order of `|k|`, positive before negative.
    pub fn terms(&self) -> Vec<(i64, Vec<Complex64>)> {
        let mut out = Vec::new();
        for (i, &f) in self.freqs.iter().enumerate() {
            let r = i * self.dim..(i + 1) * self.dim;
            if self.pos[r.clone()].iter().any(|c| *c != ZERO) {
                out.push((f as i64, self.pos[r.clone()].to_vec()));
            }
            if f > 0 && self.neg[r.clone()].iter().any(|c| *c != ZERO) {
                out.push((-(f as i64), self.neg[r].to_vec()));
            }
        }
        out
    }

    /// `lambda * f`.
    pub fn scaled(&self, lambda: Complex64) -> Self {
        let mut out = self.clone();
        out.pos.iter_mut().chain(out.neg.iter_mut()).for_each(|c| *c *= lambda);
        out
    }

    /// `w -> f(e^{i alpha} w)`: `a_k -> a_k e^{i k alpha}`.
    pub fn rotated(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        for (i, &f) in self.freqs.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, f as f64 * alpha);
            for c in 0..self.dim {
                out.pos[i * self.dim + c] *= phase;
                out.neg[i * self.dim + c] *= phase.conj();
            }
        }
        out
    }

    /// `f - a_0`.
    pub fn without_mean(&self) -> Self {
        let mut out = self.clone();
        if out.freqs.first() == Some(&0) {
            out.pos[..self.dim].iter_mut().for_each(|c| *c = ZERO);
        }
        out
    }

    /// Selects one coordinate as a scalar polynomial.
    pub fn component(&self, c: usize) -> Self {
        let mut out = TrigPolynomial::zero(1);
        out.freqs = self.freqs.clone();
        out.pos = (0..self.freqs.len()).map(|i| self.pos[i * self.dim + c]).collect();
        out.neg = (0..self.freqs.len()).map(|i| self.neg[i * self.dim + c]).collect();
        out
    }

    fn dense_run(&self) -> bool {
        self.freqs.iter().enumerate().all(|(i, &f)| f == i as u64)
    }

    /// Powers `z^k` for every stored frequency.
    fn powers(&self, z: Complex64) -> Vec<Complex64> {
        if self.dense_run() {
            let mut p = Complex64::new(1.0, 0.0);
            self.freqs
                .iter()
                .map(|_| {
                    let cur = p;
                    p *= z;
                    cur
                })
                .collect()
        } else {
            self.freqs.iter().map(|&f| pow_u64(z, f)).collect()
        }
    }

    /// Exact Poisson extension at `z`.
    pub fn eval(&self, z: DiscPoint) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim];
        self.eval_into(z.z(), &mut out);
        out
    }

    /// Poisson extension into a caller buffer; `z` is not range checked.
    pub fn eval_into(&self, z: Complex64, out: &mut [Complex64]) {
        out.iter_mut().for_each(|c| *c = ZERO);
        let pw = self.powers(z);
        for (i, zk) in pw.iter().enumerate() {
            let zkc = zk.conj();
            for c in 0..self.dim {
                out[c] += self.pos[i * self.dim + c] * zk + self.neg[i * self.dim + c] * zkc;
            }
        }
    }

    /// Analytic and antianalytic gradient parts at `z`:
    /// `A = sum_{k>=1} k a_k z^{k-1}`, `B = sum_{k>=1} k a_{-k} conj(z)^{k-1}`,
    /// so that `dx = A + B` and `dy = i (A - B)`.
    pub fn gradient_parts_into(&self, z: Complex64, a: &mut [Complex64], b: &mut [Complex64]) {
        a.iter_mut().chain(b.iter_mut()).for_each(|c| *c = ZERO);
        let dense = self.dense_run();
        let mut p = Complex64::new(1.0, 0.0);
        for (i, &f) in self.freqs.iter().enumerate() {
            if f == 0 {
                continue;
            }
            let zk1 = if dense {
                let cur = p;
                p *= z;
                cur
            } else {
                pow_u64(z, f - 1)
            };
            let w = zk1 * f as f64;
            let wc = zk1.conj() * f as f64;
            for c in 0..self.dim {
                a[c] += self.pos[i * self.dim + c] * w;
                b[c] += self.neg[i * self.dim + c] * wc;
            }
        }
    }

    /// Exact gradient at an interior point.
    pub fn gradient(&self, z: DiscPoint) -> Result<GradientValue, DiscError> {
        if !z.is_interior() {
            return Err(DiscError::BoundaryGradient(z.z()));
        }
        let mut a = vec![ZERO; self.dim];
        let mut b = vec![ZERO; self.dim];
        self.gradient_parts_into(z.z(), &mut a, &mut b);
        let zz = z.z();
        let e = if zz == ZERO {
            Complex64::new(1.0, 0.0)
        } else {
            zz / zz.norm()
        };
        let dx: Vec<Complex64> = a.iter().zip(&b).map(|(a, b)| a + b).collect();
        let dy: Vec<Complex64> = a.iter().zip(&b).map(|(a, b)| I * (a - b)).collect();
        let dr = a.iter().zip(&b).map(|(a, b)| a * e + b * e.conj()).collect();
        Ok(GradientValue { dx, dy, dr: Some(dr) })
    }

    /// Samples `f(r e^{2 pi i j / m})`, `j = 0..m`.
    pub fn sample_ring(&self, r: f64, m: usize) -> RingSamples {
        let mut values = vec![ZERO; m * self.dim];
        let mut bins = vec![ZERO; m];
        for c in 0..self.dim {
            bins.iter_mut().for_each(|b| *b = ZERO);
            for (i, &f) in self.freqs.iter().enumerate() {
                let rk = radial_power(r, f);
                let slot = (f % m as u64) as usize;
                bins[slot] += self.pos[i * self.dim + c] * rk;
                bins[(m - slot) % m] += self.neg[i * self.dim + c] * rk;
            }
            inverse_dft(&mut bins);
            for (j, v) in bins.iter().enumerate() {
                values[j * self.dim + c] = *v;
            }
        }
        RingSamples { m, dim: self.dim, values }
    }

    /// Samples the gradient parts `A`, `B` (see [`Self::gradient_parts_into`]) on a ring.
    pub fn sample_ring_gradient(&self, r: f64, m: usize) -> RingGradient {
        let mut a = vec![ZERO; m * self.dim];
        let mut b = vec![ZERO; m * self.dim];
        let mut bins_a = vec![ZERO; m];
        let mut bins_b = vec![ZERO; m];
        for c in 0..self.dim {
            bins_a.iter_mut().chain(bins_b.iter_mut()).for_each(|x| *x = ZERO);
            for (i, &f) in self.freqs.iter().enumerate() {
                if f == 0 {
                    continue;
                }
                let w = radial_power(r, f - 1) * f as f64;
                let slot = ((f - 1) % m as u64) as usize;
                bins_a[slot] += self.pos[i * self.dim + c] * w;
                bins_b[(m - slot) % m] += self.neg[i * self.dim + c] * w;
            }
            inverse_dft(&mut bins_a);
            inverse_dft(&mut bins_b);
            for j in 0..m {
                a[j * self.dim + c] = bins_a[j];
                b[j * self.dim + c] = bins_b[j];
            }
        }
        RingGradient { m, dim: self.dim, a, b }
    }

    /// Serializable form with the generating seed, if any.
    pub fn to_document(&self, space: &NormSpec, seed: Option<u64>) -> PolynomialDocument {
        let terms = self.terms();
        PolynomialDocument {
            space: space.descriptor(),
            degree: self.degree(),
            frequencies: terms.iter().map(|(k, _)| *k).collect(),
            coefficients: terms
                .iter()
                .map(|(_, a)| a.iter().map(|c| [c.re, c.im]).collect())
                .collect(),
            seed,
        }
    }

    pub fn from_document(doc: &PolynomialDocument) -> Result<Self, DiscError> {
        if doc.frequencies.len() != doc.coefficients.len() {
            return Err(DiscError::Malformed(
                "frequencies and coefficients differ in length".into(),
            ));
        }
        let terms: Vec<(i64, Vec<Complex64>)> = doc
            .frequencies
            .iter()
            .zip(&doc.coefficients)
            .map(|(&k, a)| (k, a.iter().map(|p| Complex64::new(p[0], p[1])).collect()))
            .collect();
        Self::from_terms(doc.space.d, &terms)
    }
}

/// JSON form of a polynomial. Only frequencies with a nonzero coefficient are listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialDocument {
    pub space: SpaceDescriptor,
    pub degree: u64,
    pub frequencies: Vec<i64>,
    /// `[re, im]` per coordinate, per listed frequency.
    pub coefficients: Vec<Vec<[f64; 2]>>,
    pub seed: Option<u64>,
}

fn pow_u64(z: Complex64, k: u64) -> Complex64 {
    let mut result = Complex64::new(1.0, 0.0);
    let mut base = z;
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result *= base;
        }
        base *= base;
        e >>= 1;
    }
    result
}

fn radial_power(r: f64, k: u64) -> f64 {
    if k <= i32::MAX as u64 {
        r.powi(k as i32)
    } else {
        r.powf(k as f64)
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn inverse_plan(m: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(m))
}

fn forward_plan(m: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(m))
}

/// `x_j <- sum_k x_k e^{2 pi i jk/m}` (no normalization).
pub(crate) fn inverse_dft(x: &mut [Complex64]) {
    if x.len() > 1 {
        inverse_plan(x.len()).process(x);
    }
}

/// `x_k <- sum_j x_j e^{-2 pi i jk/m}` (no normalization).
pub(crate) fn forward_dft(x: &mut [Complex64]) {
    if x.len() > 1 {
        forward_plan(x.len()).process(x);
    }
}

/// Values on a ring, `dim` coordinates per angle.
#[derive(Debug, Clone, PartialEq)]
pub struct RingSamples {
    pub m: usize,
    pub dim: usize,
    pub values: Vec<Complex64>,
}

impl RingSamples {
    pub fn at(&self, j: usize) -> &[Complex64] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    /// Coefficients `a_k` for `|k| <= (m-1)/2`, by discrete Fourier inversion
    /// of boundary samples (`r = 1`). Returned as `a_{-N}..a_N`.
    pub fn fourier_coefficients(&self) -> Vec<Vec<Complex64>> {
        let n = (self.m - 1) / 2;
        let mut out = vec![vec![ZERO; self.dim]; 2 * n + 1];
        let mut buf = vec![ZERO; self.m];
        for c in 0..self.dim {
            for j in 0..self.m {
                buf[j] = self.values[j * self.dim + c];
            }
            forward_dft(&mut buf);
            for (idx, k) in (-(n as i64)..=n as i64).enumerate() {
                let slot = k.rem_euclid(self.m as i64) as usize;
                out[idx][c] = buf[slot] / self.m as f64;
            }
        }
        out
    }
}

/// Gradient parts on a ring at angles `2 pi j / m`.
#[derive(Debug, Clone, PartialEq)]
pub struct RingGradient {
    pub m: usize,
    pub dim: usize,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

impl RingGradient {
    /// `||dx|| + ||dy||` at angle index `j`, using `scratch` of length `2 dim`.
    pub fn grad_norm(&self, space: &NormSpec, j: usize, scratch: &mut [Complex64]) -> f64 {
        let (dx, dy) = scratch.split_at_mut(self.dim);
        for c in 0..self.dim {
            let a = self.a[j * self.dim + c];
            let b = self.b[j * self.dim + c];
            dx[c] = a + b;
            dy[c] = I * (a - b);
        }
        space.norm_unchecked(dx) + space.norm_unchecked(&dy[..self.dim])
    }

    /// `||d_r f||` at angle index `j`.
    pub fn radial_norm(&self, space: &NormSpec, j: usize, scratch: &mut [Complex64]) -> f64 {
        let e = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / self.m as f64);
        for c in 0..self.dim {
            scratch[c] = self.a[j * self.dim + c] * e + self.b[j * self.dim + c] * e.conj();
        }
        space.norm_unchecked(&scratch[..self.dim])
    }
}

/// `P_{z0}(w) = (1 - |z0|^2) / |1 - conj(z0) w|^2`.
pub fn poisson_kernel_disc(z0: DiscPoint, w: DiscPoint) -> f64 {
    poisson_kernel_raw(z0.z(), w.z())
}

pub(crate) fn poisson_kernel_raw(z0: Complex64, w: Complex64) -> f64 {
    (1.0 - z0.norm_sqr()) / (Complex64::new(1.0, 0.0) - z0.conj() * w).norm_sqr()
}

/// `phi(z) = (z + z0) / (1 + conj(z0) z)` and `|phi'(z)|`.
pub fn mobius_map(z0: DiscPoint, z: DiscPoint) -> (DiscPoint, f64) {
    let (w, d) = mobius_raw(z0.z(), z.z());
    (DiscPoint(w), d.norm())
}

/// `phi(z)` and the complex derivative `phi'(z) = (1 - |z0|^2) / (1 + conj(z0) z)^2`.
pub fn mobius_derivative(z0: Complex64, z: Complex64) -> Complex64 {
    mobius_raw(z0, z).1
}

fn mobius_raw(z0: Complex64, z: Complex64) -> (Complex64, Complex64) {
    let den = Complex64::new(1.0, 0.0) + z0.conj() * z;
    ((z + z0) / den, (1.0 - z0.norm_sqr()) / (den * den))
}

/// Gradient of `f o phi` at `z` through the real Jacobian of `phi`:
/// `d_x (f o phi) = f_x Re phi' + f_y Im phi'`, `d_y (f o phi) = -f_x Im phi' + f_y Re phi'`.
pub fn composed_gradient(
    f: &TrigPolynomial,
    z0: DiscPoint,
    z: DiscPoint,
) -> Result<GradientValue, DiscError> {
    let (w, d) = mobius_raw(z0.z(), z.z());
    let inner = f.gradient(DiscPoint::new(w)?)?;
    let dx = inner
        .dx
        .iter()
        .zip(&inner.dy)
        .map(|(fx, fy)| fx * d.re + fy * d.im)
        .collect();
    let dy = inner
        .dx
        .iter()
        .zip(&inner.dy)
        .map(|(fx, fy)| -fx * d.im + fy * d.re)
        .collect();
    Ok(GradientValue { dx, dy, dr: None })
}

pub fn eval_poisson_extension(f: &TrigPolynomial, z: DiscPoint) -> Vec<Complex64> {
    f.eval(z)
}

pub fn eval_gradient(f: &TrigPolynomial, z: DiscPoint) -> Result<GradientValue, DiscError> {
    f.gradient(z)
}

/// `||df/dx|| + ||df/dy||` at an interior point.
pub fn gradient_norm(space: &NormSpec, f: &TrigPolynomial, z: DiscPoint) -> Result<f64, DiscError> {
    if f.dim() != space.dim() {
        return Err(DiscError::DimensionMismatch {
            expected: space.dim(),
            got: f.dim(),
        });
    }
    Ok(f.gradient(z)?.norm(space))
}

/// Random polynomial of degree `n` in `C^dim`: `a_k = (1 + |k|)^{-gamma} g_k` with
/// `g_k` standard complex Gaussian (real and imaginary parts of variance 1/2).
/// With `analytic`, only `k >= 0` is populated.
pub fn random_polynomial(n: usize, gamma: f64, dim: usize, seed: u64, analytic: bool) -> TrigPolynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut terms = Vec::with_capacity(2 * n + 1);
    for k in -(n as i64)..=(n as i64) {
        if analytic && k < 0 {
            continue;
        }
        let scale = (1.0 + k.unsigned_abs() as f64).powf(-gamma);
        let a: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re * s, im * s) * scale
            })
            .collect();
        terms.push((k, a));
    }
    TrigPolynomial::from_terms(dim, &terms).expect("dimension is consistent")
}

/// `sum_{k=1..m} a_k w^{2^k}`.
pub fn lacunary_polynomial(vectors: &[Vec<Complex64>]) -> Result<TrigPolynomial, DiscError> {
    if vectors.len() > MAX_LACUNARY_TERMS {
        return Err(DiscError::LacunaryTooLong(vectors.len()));
    }
    let dim = vectors.first().map(|v| v.len()).unwrap_or(1);
    let terms: Vec<(i64, Vec<Complex64>)> = vectors
        .iter()
        .enumerate()
        .map(|(i, a)| (1i64 << (i + 1), a.clone()))
        .collect();
    TrigPolynomial::from_terms(dim, &terms)
}
