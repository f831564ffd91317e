//! Littlewood-Paley g-function and Lusin area function.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bmo::power;
use super::{check_dims, check_gradient_q, pow2_at_least, FunctionalError, GradientMode};
use crate::disc_harmonics::{DiscPoint, TrigPolynomial};
use crate::normed_spaces::NormSpec;
use crate::quadrature::{gauss_legendre, radial_composite};

/// Radial rule for `int_0^1 ... dr`: `radial_composite(levels, order)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadialSampling {
    pub levels: usize,
    pub order: usize,
}

impl Default for RadialSampling {
    fn default() -> Self {
        RadialSampling { levels: 24, order: 8 }
    }
}

fn gradient_size(space: &NormSpec, f: &TrigPolynomial, z: Complex64, mode: GradientMode) -> f64 {
    let g = f.gradient(DiscPoint::new(z).expect("interior node")).expect("interior node");
    match mode {
        GradientMode::Full => g.norm(space),
        GradientMode::Radial => space.norm_unchecked(g.dr.as_deref().expect("dr is always set")),
    }
}

/// `(int_0^1 (1-r)^(q-1) ||grad f(r e^{i theta})||^q dr)^(1/q)`.
pub fn g_function(
    space: &NormSpec,
    f: &TrigPolynomial,
    q: f64,
    theta: f64,
    mode: GradientMode,
    sampling: &RadialSampling,
) -> Result<f64, FunctionalError> {
    check_dims(space, f)?;
    check_gradient_q(q)?;
    let rule = radial_composite(sampling.levels, sampling.order)?;
    let mut acc = 0.0;
    for (&r, w) in rule.iter() {
        let g = gradient_size(space, f, Complex64::from_polar(r, theta), mode);
        acc += w * (1.0 - r).powf(q - 1.0) * power(g, q);
    }
    Ok(acc.powf(1.0 / q))
}

/// `g_function` at the `m` angles `2 pi j / m`, from FFT ring samples.
pub fn g_function_ring(
    space: &NormSpec,
    f: &TrigPolynomial,
    q: f64,
    mode: GradientMode,
    sampling: &RadialSampling,
    m: usize,
) -> Result<Vec<f64>, FunctionalError> {
    check_dims(space, f)?;
    check_gradient_q(q)?;
    if m == 0 {
        return Err(FunctionalError::InvalidParameter("ring needs m >= 1".into()));
    }
    let rule = radial_composite(sampling.levels, sampling.order)?;
    let mut acc = vec![0.0; m];
    let mut scratch = vec![Complex64::new(0.0, 0.0); 2 * f.dim()];
    for (&r, w) in rule.iter() {
        let ring = f.sample_ring_gradient(r, m);
        let weight = w * (1.0 - r).powf(q - 1.0);
        for (j, a) in acc.iter_mut().enumerate() {
            let g = match mode {
                GradientMode::Full => ring.grad_norm(space, j, &mut scratch),
                GradientMode::Radial => ring.radial_norm(space, j, &mut scratch),
            };
            *a += weight * power(g, q);
        }
    }
    Ok(acc.into_iter().map(|v| v.powf(1.0 / q)).collect())
}

/// `||G_q f||_{L^p(T)}` with the circle discretized by `m` equispaced angles.
pub fn g_lp(
    space: &NormSpec,
    f: &TrigPolynomial,
    q: f64,
    p: f64,
    m: usize,
    sampling: &RadialSampling,
) -> Result<f64, FunctionalError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(FunctionalError::InvalidExponent { q: p, bound: "in (1, inf) for p" });
    }
    let g = g_function_ring(space, f, q, GradientMode::Full, sampling, m)?;
    let mean = g.iter().map(|v| v.powf(p)).sum::<f64>() / m as f64;
    Ok(mean.powf(1.0 / p))
}

/// Resolution of the Stolz-region rule used by [`lusin_area`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LusinSampling {
    pub radial_levels: usize,
    pub order: usize,
    /// Gauss-Legendre order per angular panel.
    pub angular_order: usize,
}

impl Default for LusinSampling {
    fn default() -> Self {
        LusinSampling {
            radial_levels: 24,
            order: 8,
            angular_order: 8,
        }
    }
}

/// Half-width of the Stolz region `{|z - e^{i theta}| <= alpha (1 - |z|)}` on the
/// circle of radius `r`; `None` when the region contains the whole circle.
pub(crate) fn stolz_half_width(r: f64, alpha: f64) -> Option<f64> {
    if r == 0.0 {
        return None;
    }
    let c = (1.0 + r * r - alpha * alpha * (1.0 - r) * (1.0 - r)) / (2.0 * r);
    if c <= -1.0 {
        None
    } else {
        Some(c.min(1.0).acos())
    }
}

/// `(int_{Gamma_alpha(theta)} (1-|z|)^(q-2) ||grad f(z)||^q dA(z))^(1/q)`.
///
/// The region is integrated exactly in angle: on each radial node the
/// arc `|phi - theta| <= beta(r)` carries a composite Gauss-Legendre rule, and
/// the radial panel containing the radius where the region starts to cover
/// whole circles is split there.
pub fn lusin_area(
    space: &NormSpec,
    f: &TrigPolynomial,
    q: f64,
    theta: f64,
    alpha: f64,
    mode: GradientMode,
    sampling: &LusinSampling,
) -> Result<f64, FunctionalError> {
    check_dims(space, f)?;
    check_gradient_q(q)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(FunctionalError::InvalidParameter(format!("aperture must be positive, got {alpha}")));
    }
    if alpha <= 1.0 {
        // the region degenerates to (a subset of) a radius
        return Ok(0.0);
    }
    let r_full = (alpha - 1.0) / (alpha + 1.0);
    let (gx, gw) = gauss_legendre(sampling.order)?;
    let (ax, aw) = gauss_legendre(sampling.angular_order)?;
    let n = f.degree().max(1) as f64;
    let full_m = pow2_at_least((8.0 * n) as usize).max(64);
    let mut panels = Vec::new();
    for j in 0..sampling.radial_levels {
        let a = 1.0 - (-(j as f64)).exp2();
        let b = 1.0 - (-(j as f64 + 1.0)).exp2();
        if a < r_full && r_full < b {
            panels.push((a, r_full));
            panels.push((r_full, b));
        } else {
            panels.push((a, b));
        }
    }
    let mut acc = 0.0;
    for (a, b) in panels {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in gx.iter().zip(&gw) {
            let r = mid + half * x;
            let radial_weight = half * w * r * (1.0 - r).powf(q - 2.0);
            let angular = match stolz_half_width(r, alpha) {
                None => {
                    // trapezoid anchored at theta so the rule rotates with the region
                    let mut s = 0.0;
                    for jj in 0..full_m {
                        let phi = theta + 2.0 * PI * jj as f64 / full_m as f64;
                        s += power(gradient_size(space, f, Complex64::from_polar(r, phi), mode), q);
                    }
                    s * 2.0 * PI / full_m as f64
                }
                Some(beta) => {
                    let count = (beta * (n + 1.0)).ceil().max(1.0) as usize;
                    let width = 2.0 * beta / count as f64;
                    let mut s = 0.0;
                    for p in 0..count {
                        let lo = theta - beta + p as f64 * width;
                        for (y, v) in ax.iter().zip(&aw) {
                            let phi = lo + 0.5 * width * (y + 1.0);
                            let g = gradient_size(space, f, Complex64::from_polar(r, phi), mode);
                            s += 0.5 * width * v * power(g, q);
                        }
                    }
                    s
                }
            };
            acc += radial_weight * angular;
        }
    }
    Ok(acc.powf(1.0 / q))
}
