//! Half-plane kernels on the line (`n = 1`) and their discretized operators.
//!
//! `P_t(x) = t / (pi (t^2 + x^2))`, `phi_t = t d_t P_t`, and by the semigroup
//! property `phi_s * phi_t = k_{s,t}` with `k_{s,t}(x) = s t (d_r^2 P_r)(x)` at
//! `r = s + t`. The cone operators live in [`cone`].

pub mod cone;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::gauss_legendre;

pub use cone::{
    apply_phi, apply_psi, op_norm_estimate, op_norm_ratio, poisson_extend_psi, ConeFunction,
    ConeGrid, OpNormRow, ProbeConfig, TruncationBox,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("kernel k needs both s and t")]
    MissingS,
    #[error("quadrature too coarse: error estimate {estimate:e} exceeds {threshold:e}")]
    ResolutionTooCoarse { estimate: f64, threshold: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn positive(name: &'static str, value: f64) -> Result<(), KernelError> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(KernelError::NonPositive { name, value });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    P,
    Phi,
    K,
}

/// `P_t(x)`.
#[inline]
pub fn poisson(t: f64, x: f64) -> f64 {
    t / (PI * (t * t + x * x))
}

/// `phi_t(x) = t d_t P_t(x) = t (x^2 - t^2) / (pi (t^2 + x^2)^2)`.
#[inline]
pub fn phi(t: f64, x: f64) -> f64 {
    let d = t * t + x * x;
    t * (x * x - t * t) / (PI * d * d)
}

/// `d_r P_r(x) = (x^2 - r^2) / (pi (r^2 + x^2)^2)`.
#[inline]
pub fn dr_poisson(r: f64, x: f64) -> f64 {
    let d = r * r + x * x;
    (x * x - r * r) / (PI * d * d)
}

/// `d_r^2 P_r(x) = 2 r (r^2 - 3 x^2) / (pi (r^2 + x^2)^3)`.
#[inline]
pub fn d2r_poisson(r: f64, x: f64) -> f64 {
    let d = r * r + x * x;
    2.0 * r * (r * r - 3.0 * x * x) / (PI * d * d * d)
}

/// `k_{s,t}(x) = s t d_r^2 P_r(x)` at `r = s + t`.
#[inline]
pub fn k_kernel(s: f64, t: f64, x: f64) -> f64 {
    s * t * d2r_poisson(s + t, x)
}

pub fn kernel_eval(kind: KernelKind, s: Option<f64>, t: f64, x: f64) -> Result<f64, KernelError> {
    positive("t", t)?;
    match kind {
        KernelKind::P => Ok(poisson(t, x)),
        KernelKind::Phi => Ok(phi(t, x)),
        KernelKind::K => {
            let s = s.ok_or(KernelError::MissingS)?;
            positive("s", s)?;
            Ok(k_kernel(s, t, x))
        }
    }
}

/// Gauss-Legendre order per panel of the convolution rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvolveResolution {
    pub order: usize,
}

impl Default for ConvolveResolution {
    fn default() -> Self {
        ConvolveResolution { order: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvolveCheck {
    pub numeric: f64,
    pub closed_form: f64,
    pub relative_error: f64,
    /// `|I(order) - I(order/2)|`.
    pub error_estimate: f64,
}

/// Panel breakpoints on `[-w, w]`, graded geometrically away from `centers`.
fn graded_breakpoints(w: f64, centers: &[f64], h: f64) -> Vec<f64> {
    let mut pts = vec![-w, w];
    for &c in centers {
        pts.push(c);
        let mut d = h;
        while d < 2.0 * w {
            for p in [c - d, c + d] {
                if p > -w && p < w {
                    pts.push(p);
                }
            }
            d *= 2.0;
        }
    }
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * w);
    pts
}

fn phi_convolution(s: f64, t: f64, x: f64, order: usize) -> f64 {
    let (gx, gw) = gauss_legendre(order).expect("order >= 1");
    let integrand = |y: f64| phi(s, x - y) * phi(t, y);
    let w = 50.0 * (s + t) + x.abs();
    let pts = graded_breakpoints(w, &[0.0, x], 0.25 * s.min(t));
    let mut acc = 0.0;
    for pair in pts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (xi, wi) in gx.iter().zip(&gw) {
            acc += half * wi * integrand(mid + half * xi);
        }
    }
    // tails |y| > w through y = +-w/u, u in (0, 1]; the integrand decays like |y|^-4
    let tail_panels = 4;
    for side in [1.0, -1.0] {
        for p in 0..tail_panels {
            let a = p as f64 / tail_panels as f64;
            let b = (p + 1) as f64 / tail_panels as f64;
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (xi, wi) in gx.iter().zip(&gw) {
                let u = mid + half * xi;
                acc += half * wi * integrand(side * w / u) * w / (u * u);
            }
        }
    }
    acc
}

/// Numeric `(phi_s * phi_t)(x)` against the closed form `k_{s,t}(x)`.
pub fn convolve_check(s: f64, t: f64, x: f64, resolution: ConvolveResolution) -> Result<ConvolveCheck, KernelError> {
    positive("s", s)?;
    positive("t", t)?;
    if resolution.order < 2 {
        return Err(KernelError::InvalidParameter("order must be >= 2".into()));
    }
    let numeric = phi_convolution(s, t, x, resolution.order);
    let coarse = phi_convolution(s, t, x, resolution.order / 2);
    let closed_form = k_kernel(s, t, x);
    let error_estimate = (numeric - coarse).abs();
    let scale = closed_form.abs().max(1e-300);
    let threshold = 1e-8 * scale.max(k_kernel(s, t, 0.0).abs() * 1e-6);
    if error_estimate > threshold {
        return Err(KernelError::ResolutionTooCoarse {
            estimate: error_estimate,
            threshold,
        });
    }
    Ok(ConvolveCheck {
        numeric,
        closed_form,
        relative_error: (numeric - closed_form).abs() / scale,
        error_estimate,
    })
}

/// `|k_{s,t}(x)| (s + t + |x|)^3 / (s t)`.
pub fn decay_ratio(s: f64, t: f64, x: f64) -> f64 {
    k_kernel(s, t, x).abs() * (s + t + x.abs()).powi(3) / (s * t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySweep {
    /// Grid points per octave.
    pub density: usize,
    pub points: usize,
    pub sup: f64,
    pub argmax: (f64, f64, f64),
}

/// Sup of [`decay_ratio`] over `s, t in 2^{i/density}` (`|i| <= 8 density`) and
/// `x in {0} u {+-2^{i/density}: -10 density <= i <= 10 density}`.
pub fn decay_sweep(density: usize) -> Result<DecaySweep, KernelError> {
    if density == 0 {
        return Err(KernelError::InvalidParameter("density must be >= 1".into()));
    }
    let n = density as i64;
    let st: Vec<f64> = (-8 * n..=8 * n).map(|i| (i as f64 / n as f64).exp2()).collect();
    let mut xs = vec![0.0];
    for i in -10 * n..=10 * n {
        let v = (i as f64 / n as f64).exp2();
        xs.push(v);
        xs.push(-v);
    }
    let mut out = DecaySweep {
        density,
        points: 0,
        sup: 0.0,
        argmax: (1.0, 1.0, 0.0),
    };
    for &s in &st {
        for &t in &st {
            for &x in &xs {
                let r = decay_ratio(s, t, x);
                out.points += 1;
                if r > out.sup {
                    out.sup = r;
                    out.argmax = (s, t, x);
                }
            }
        }
    }
    Ok(out)
}
