//! Arc and Poisson forms of the BMO norm.

use num_complex::Complex64;

use super::{check_dims, pow2_at_least, ArcGrid, FunctionalError, Location, PoissonGrid};
use crate::disc_harmonics::{poisson_kernel_raw, TrigPolynomial};
use crate::normed_spaces::NormSpec;

/// Boundary resolution used by [`bmo_arc`].
pub fn arc_nodes(grid: &ArcGrid, degree: u64) -> usize {
    grid.min_nodes().max(pow2_at_least(16 * degree.max(1) as usize))
}

/// `sup_I |I|^-1 int_I ||f - f_I|| dm` over the arcs of `grid` (full circle included).
pub fn bmo_arc(space: &NormSpec, f: &TrigPolynomial, grid: &ArcGrid) -> Result<f64, FunctionalError> {
    bmo_arc_detailed(space, f, grid).map(|(v, _)| v)
}

pub fn bmo_arc_detailed(
    space: &NormSpec,
    f: &TrigPolynomial,
    grid: &ArcGrid,
) -> Result<(f64, Location), FunctionalError> {
    check_dims(space, f)?;
    grid.validate()?;
    let m = arc_nodes(grid, f.degree());
    let samples = f.sample_ring(1.0, m);
    let d = f.dim();
    let mut mean = vec![Complex64::new(0.0, 0.0); d];
    let mut diff = vec![Complex64::new(0.0, 0.0); d];
    let mut best = (0.0f64, Location::Arc { depth: 0, start: 0.0, length: 1.0 });
    for (depth, start, span) in grid.arcs(m) {
        let weight = |n: usize| if n == 0 || n == span { 0.5 } else { 1.0 };
        mean.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for n in 0..=span {
            let w = weight(n);
            for (mc, v) in mean.iter_mut().zip(samples.at((start + n) % m)) {
                *mc += v * w;
            }
        }
        mean.iter_mut().for_each(|c| *c /= span as f64);
        let mut osc = 0.0;
        for n in 0..=span {
            for ((dc, v), mc) in diff.iter_mut().zip(samples.at((start + n) % m)).zip(&mean) {
                *dc = v - mc;
            }
            osc += weight(n) * space.norm_unchecked(&diff);
        }
        osc /= span as f64;
        if osc > best.0 {
            best = (
                osc,
                Location::Arc {
                    depth,
                    start: start as f64 / m as f64,
                    length: span as f64 / m as f64,
                },
            );
        }
    }
    Ok(best)
}

/// Boundary resolution used by [`bmo_poisson_q`] for `z0` ring `j`.
pub fn poisson_nodes(j: usize, degree: u64) -> usize {
    pow2_at_least((2 * degree as usize + 1).max(1 << (j + 4)))
}

/// Resolution description for the inner circle integrals of [`bmo_poisson_q`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BoundaryGrid {
    pub z0: PoissonGrid,
    /// Finest circle resolution used.
    pub nodes: usize,
}

/// `sup_{z0} (int ||f(z) - f(z0)||^q P_{z0}(z) dm(z))^(1/q)` over the `z0` grid.
pub fn bmo_poisson_q(space: &NormSpec, f: &TrigPolynomial, q: f64, grid: &PoissonGrid) -> Result<f64, FunctionalError> {
    bmo_poisson_q_detailed(space, f, q, grid).map(|(v, _, _)| v)
}

/// As [`bmo_poisson_q`], also returning the maximizing `z0` and the resolution used.
pub fn bmo_poisson_q_detailed(
    space: &NormSpec,
    f: &TrigPolynomial,
    q: f64,
    grid: &PoissonGrid,
) -> Result<(f64, Location, BoundaryGrid), FunctionalError> {
    check_dims(space, f)?;
    if !(q >= 1.0 && q.is_finite()) {
        return Err(FunctionalError::InvalidExponent { q, bound: ">= 1" });
    }
    let degree = f.degree();
    let finest = poisson_nodes(grid.levels, degree);
    let samples = f.sample_ring(1.0, finest);
    let d = f.dim();
    let mut fz0 = vec![Complex64::new(0.0, 0.0); d];
    let mut diff = vec![Complex64::new(0.0, 0.0); d];
    let mut best = (0.0f64, Location::point(Complex64::new(0.0, 0.0)));
    for j in 0..=grid.levels {
        let rho = PoissonGrid::ring_radius(j);
        let mj = grid.ring_count(j);
        let mq = poisson_nodes(j, degree);
        let stride = finest / mq;
        let shift = mq / mj.min(mq);
        let kernel: Vec<f64> = (0..mq)
            .map(|n| {
                let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * n as f64 / mq as f64);
                poisson_kernel_raw(Complex64::new(rho, 0.0), w)
            })
            .collect();
        for m in 0..mj {
            let z0 = Complex64::from_polar(rho, 2.0 * std::f64::consts::PI * m as f64 / mj as f64);
            f.eval_into(z0, &mut fz0);
            let mut acc = 0.0;
            for n in 0..mq {
                for ((dc, v), c) in diff.iter_mut().zip(samples.at(n * stride)).zip(&fz0) {
                    *dc = v - c;
                }
                let nrm = space.norm_unchecked(&diff);
                let k = kernel[(n + mq - (m * shift) % mq) % mq];
                acc += power(nrm, q) * k;
            }
            acc /= mq as f64;
            if acc > best.0 {
                best = (acc, Location::point(z0));
            }
        }
    }
    Ok((
        best.0.powf(1.0 / q),
        best.1,
        BoundaryGrid { z0: *grid, nodes: finest },
    ))
}

#[inline]
pub(crate) fn power(x: f64, q: f64) -> f64 {
    if q == 2.0 {
        x * x
    } else if q == 1.0 {
        x
    } else if q == 3.0 {
        x * x * x
    } else {
        x.powf(q)
    }
}
