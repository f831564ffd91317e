//! BMO norms, square functions and Carleson functionals of disc polynomials.
//!
//! Gradient functionals use `||grad f|| = ||f_x|| + ||f_y||`. Sup-type
//! functionals are maxima over explicit finite grids ([`ArcGrid`],
//! [`PoissonGrid`]); refining a grid only adds candidates.

mod bmo;
mod carleson;
mod square;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disc_harmonics::TrigPolynomial;
use crate::normed_spaces::NormSpec;
use crate::quadrature::QuadratureError;

pub use bmo::{arc_nodes, poisson_nodes, bmo_arc, bmo_arc_detailed, bmo_poisson_q, bmo_poisson_q_detailed, BoundaryGrid};
pub use carleson::{
    c_q_from_tents, c_q_pointwise, carleson_poisson, carleson_poisson_with, carleson_tent,
    carleson_tent_with, poisson_balayage, tent_sampling, tent_values, RingField, TentValue,
};
pub use square::{g_function, g_function_ring, g_lp, lusin_area, LusinSampling, RadialSampling};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error("exponent q = {q} not allowed here (need q {bound})")]
    InvalidExponent { q: f64, bound: &'static str },
    #[error("polynomial has dimension {got}, space has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

pub(crate) fn check_dims(space: &NormSpec, f: &TrigPolynomial) -> Result<(), FunctionalError> {
    if space.dim() != f.dim() {
        return Err(FunctionalError::DimensionMismatch {
            expected: space.dim(),
            got: f.dim(),
        });
    }
    Ok(())
}

pub(crate) fn check_gradient_q(q: f64) -> Result<(), FunctionalError> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(FunctionalError::InvalidExponent { q, bound: "> 1" });
    }
    Ok(())
}

/// Smallest power of two `>= n` (and `>= 1`).
pub fn pow2_at_least(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// `ceil(log2 n)` for `n >= 1`.
pub fn log2_ceil(n: usize) -> usize {
    pow2_at_least(n).trailing_zeros() as usize
}

/// Dyadic arcs: at depth `j >= 1` arcs of normalized length `2^-j` with centers
/// every `2^-j / centers_per_level`; depth 0 is the whole circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcGrid {
    pub max_depth: usize,
    pub centers_per_level: usize,
}

impl ArcGrid {
    pub fn new(max_depth: usize) -> Self {
        ArcGrid {
            max_depth,
            centers_per_level: 4,
        }
    }

    pub(crate) fn validate(&self) -> Result<(), FunctionalError> {
        if self.max_depth < 1 {
            return Err(FunctionalError::InvalidGrid("arc grid depth must be >= 1".into()));
        }
        if self.max_depth > 24 {
            return Err(FunctionalError::InvalidGrid(format!(
                "arc grid depth {} is beyond the supported 24",
                self.max_depth
            )));
        }
        if !self.centers_per_level.is_power_of_two() {
            return Err(FunctionalError::InvalidGrid(
                "centers_per_level must be a power of two".into(),
            ));
        }
        Ok(())
    }

    /// Circle resolution needed so that every arc endpoint is a node and each
    /// arc carries at least `8 * 2^(max_depth - j)` node intervals.
    pub fn min_nodes(&self) -> usize {
        (self.centers_per_level.max(8)) << self.max_depth
    }

    /// `(depth, start index, span)` of every arc on an `m`-node circle.
    pub(crate) fn arcs(&self, m: usize) -> Vec<(usize, usize, usize)> {
        let mut out = vec![(0, 0, m)];
        for j in 1..=self.max_depth {
            let span = m >> j;
            let stride = span / self.centers_per_level;
            let count = self.centers_per_level << j;
            for c in 0..count {
                let start = (c * stride + m - span / 2) % m;
                out.push((j, start, span));
            }
        }
        out
    }
}

/// Radial and angular resolution of ring-based disc integration: rings at the
/// nodes of `radial_composite(radial_levels, order)`, `angular` equispaced
/// samples per ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscSampling {
    pub radial_levels: usize,
    pub order: usize,
    pub angular: usize,
}

impl DiscSampling {
    /// Default resolution for a polynomial of degree `n`.
    pub fn for_degree(n: u64) -> Self {
        let n = n.max(1) as usize;
        DiscSampling {
            radial_levels: log2_ceil(n) + 6,
            order: 6,
            angular: pow2_at_least((8 * n).max(64)),
        }
    }

    /// One level finer: twice the angular samples, one more dyadic panel.
    pub fn refined(self) -> Self {
        DiscSampling {
            radial_levels: self.radial_levels + 1,
            order: self.order,
            angular: 2 * self.angular,
        }
    }

    /// One level coarser (used for error estimates).
    pub fn coarsened(self) -> Self {
        DiscSampling {
            radial_levels: self.radial_levels.saturating_sub(1).max(1),
            order: self.order,
            angular: (self.angular / 2).max(8),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AngularLayout {
    /// `max(8, 2^(j+3))` points on ring `j`.
    #[default]
    Full,
    /// Only the point on the positive real axis of each ring. Exact for
    /// integrands whose sup over a ring does not depend on the angle.
    Ray,
}

/// `z0 = (1 - 2^-j) e^{2 pi i m / M_j}`, `j = 0..=levels`, `M_j = max(8, 2^(j+3))`.
/// Ring 0 is the single point `z0 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoissonGrid {
    pub levels: usize,
    #[serde(default)]
    pub angles: AngularLayout,
}

impl PoissonGrid {
    pub fn new(levels: usize) -> Self {
        PoissonGrid {
            levels,
            angles: AngularLayout::Full,
        }
    }

    pub fn for_degree(n: u64) -> Self {
        Self::new(log2_ceil(n.max(1) as usize) + 3)
    }

    pub fn ring_radius(j: usize) -> f64 {
        1.0 - (-(j as f64)).exp2()
    }

    pub fn ring_count(&self, j: usize) -> usize {
        match (j, self.angles) {
            (0, _) | (_, AngularLayout::Ray) => 1,
            (j, AngularLayout::Full) => 8usize.max(1 << (j + 3)),
        }
    }

    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for j in 0..=self.levels {
            let rho = Self::ring_radius(j);
            let mj = self.ring_count(j);
            for m in 0..mj {
                out.push(Complex64::from_polar(
                    rho,
                    2.0 * std::f64::consts::PI * m as f64 / mj as f64,
                ));
            }
        }
        out
    }
}

/// Where a supremum was attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Location {
    Point { re: f64, im: f64 },
    /// Arc `[start, start + length]` in normalized arclength (full turn = 1).
    Arc { depth: usize, start: f64, length: f64 },
}

impl Location {
    pub fn point(z: Complex64) -> Self {
        Location::Point { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GridMeta {
    Poisson {
        z0_levels: usize,
        angles: AngularLayout,
        sampling: DiscSampling,
    },
    Tent {
        arcs: ArcGrid,
        sampling: DiscSampling,
    },
}

/// Result of a Carleson-type supremum. `value` is the supremum of the
/// integrals themselves (homogeneous of degree `q`); `rooted` is `value^(1/q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarlesonReport {
    pub functional: &'static str,
    pub q: f64,
    pub value: f64,
    pub rooted: f64,
    pub argmax: Location,
    pub grid: GridMeta,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GradientMode {
    /// `||f_x|| + ||f_y||`.
    #[default]
    Full,
    /// `||d_r f||`.
    Radial,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arc_layout() {
        let g = ArcGrid::new(2);
        let m = g.min_nodes();
        assert_eq!(m, 32);
        let arcs = g.arcs(m);
        assert_eq!(arcs.len(), 1 + 8 + 16);
        assert_eq!(arcs[0], (0, 0, 32));
        // depth 1: length 1/2 centred at 0 starts at -1/4
        assert_eq!(arcs[1], (1, 24, 16));
        assert_eq!(arcs[2], (1, 28, 16));
        assert!(arcs.iter().filter(|a| a.0 == 2).all(|a| a.2 == 8));
    }

    #[test]
    fn poisson_grid_points() {
        let g = PoissonGrid::new(2);
        let pts = g.points();
        assert_eq!(pts.len(), 1 + 16 + 32);
        assert_eq!(pts[0], Complex64::new(0.0, 0.0));
        assert!((pts[1].norm() - 0.5).abs() < 1e-15);
        let ray = PoissonGrid { levels: 2, angles: AngularLayout::Ray };
        assert_eq!(ray.points().len(), 3);
    }

    #[test]
    fn default_sampling_scales_with_degree() {
        let s = DiscSampling::for_degree(128);
        assert_eq!(s.radial_levels, 13);
        assert_eq!(s.angular, 1024);
        assert_eq!(DiscSampling::for_degree(1).angular, 64);
        assert_eq!(PoissonGrid::for_degree(128).levels, 10);
    }

    #[test]
    fn report_serializes() {
        let r = CarlesonReport {
            functional: "carleson_poisson",
            q: 2.0,
            value: 4.0,
            rooted: 2.0,
            argmax: Location::point(Complex64::new(0.5, 0.0)),
            grid: GridMeta::Poisson {
                z0_levels: 3,
                angles: AngularLayout::Full,
                sampling: DiscSampling::for_degree(4),
            },
            error_estimate: 1e-9,
        };
        let v: serde_json::Value = serde_json::to_value(r).unwrap();
        for key in ["functional", "q", "value", "argmax", "grid", "error_estimate"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["argmax"]["kind"], "point");
    }
}
