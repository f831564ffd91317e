//! Carleson functionals of the gradient measure: Poisson-balayage and tent forms.
//!
//! Both start from ring data: on each node `r_i` of a dyadic radial rule, a
//! nonnegative function sampled at `m` equispaced angles. Tents are prefix sums
//! of ring data over aligned arcs. Poisson balayage uses
//! `P_{z0}(r e^{it}) = (1-|z0|^2)/(1-r^2|z0|^2) * P_{r z0}(e^{it})`, so each ring
//! contributes its Fourier coefficients times `(r |z0|)^{|k|}`, and one inverse
//! FFT per `z0` ring evaluates all angles at once.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bmo::power;
use super::{
    check_dims, check_gradient_q, ArcGrid, CarlesonReport, DiscSampling, FunctionalError,
    GradientMode, GridMeta, Location, PoissonGrid,
};
use crate::disc_harmonics::{forward_dft, inverse_dft, TrigPolynomial};
use crate::normed_spaces::NormSpec;
use crate::quadrature::radial_composite;

/// Samples of a nonnegative function on the rings of a [`DiscSampling`].
#[derive(Debug, Clone, PartialEq)]
pub struct RingField {
    pub sampling: DiscSampling,
    pub radii: Vec<f64>,
    /// Radial quadrature weights (without the area factor `r`).
    pub weights: Vec<f64>,
    /// `values[i][j]` at `r_i e^{2 pi i j / m}`.
    pub values: Vec<Vec<f64>>,
}

impl RingField {
    fn rule(sampling: &DiscSampling) -> Result<(Vec<f64>, Vec<f64>), FunctionalError> {
        if sampling.angular == 0 {
            return Err(FunctionalError::InvalidGrid("angular resolution must be >= 1".into()));
        }
        let rule = radial_composite(sampling.radial_levels, sampling.order)?;
        Ok((rule.nodes().to_vec(), rule.weights().to_vec()))
    }

    /// `||grad f||` (or `||d_r f||`) on every ring.
    pub fn gradient(
        space: &NormSpec,
        f: &TrigPolynomial,
        sampling: &DiscSampling,
        mode: GradientMode,
    ) -> Result<Self, FunctionalError> {
        check_dims(space, f)?;
        let (radii, weights) = Self::rule(sampling)?;
        let m = sampling.angular;
        let mut scratch = vec![Complex64::new(0.0, 0.0); 2 * f.dim()];
        let values = radii
            .iter()
            .map(|&r| {
                let ring = f.sample_ring_gradient(r, m);
                (0..m)
                    .map(|j| match mode {
                        GradientMode::Full => ring.grad_norm(space, j, &mut scratch),
                        GradientMode::Radial => ring.radial_norm(space, j, &mut scratch),
                    })
                    .collect()
            })
            .collect();
        Ok(RingField {
            sampling: *sampling,
            radii,
            weights,
            values,
        })
    }

    /// `||f||` on every ring.
    pub fn values(space: &NormSpec, f: &TrigPolynomial, sampling: &DiscSampling) -> Result<Self, FunctionalError> {
        check_dims(space, f)?;
        let (radii, weights) = Self::rule(sampling)?;
        let m = sampling.angular;
        let values = radii
            .iter()
            .map(|&r| {
                let ring = f.sample_ring(r, m);
                (0..m).map(|j| space.norm_unchecked(ring.at(j))).collect()
            })
            .collect();
        Ok(RingField {
            sampling: *sampling,
            radii,
            weights,
            values,
        })
    }

    /// `w(r_i) * values^q`, ring by ring.
    pub fn weighted<W: Fn(f64) -> f64>(&self, q: f64, w: W) -> Vec<Vec<f64>> {
        self.radii
            .iter()
            .zip(&self.values)
            .map(|(&r, ring)| {
                let wr = w(r);
                ring.iter().map(|&g| wr * power(g, q)).collect()
            })
            .collect()
    }
}

/// `int_D F(z) P_{z0}(z) dA(z)` for every `z0` of `grid`, in grid order.
///
/// `data[i]` samples `F` on the circle of radius `radii[i]`; all rings share
/// one angular resolution. The angular integral is the exact Poisson integral
/// of the trigonometric interpolant of the ring samples.
pub fn poisson_balayage(
    radii: &[f64],
    weights: &[f64],
    data: &[Vec<f64>],
    grid: &PoissonGrid,
) -> Vec<(Complex64, f64)> {
    let m = data.first().map(|d| d.len()).unwrap_or(1).max(1);
    let half = m / 2;
    let spectra: Vec<Vec<Complex64>> = data
        .iter()
        .map(|ring| {
            let mut buf: Vec<Complex64> = ring.iter().map(|&v| Complex64::new(v / m as f64, 0.0)).collect();
            forward_dft(&mut buf);
            buf
        })
        .collect();
    let mut out = Vec::new();
    for j in 0..=grid.levels {
        let rho = PoissonGrid::ring_radius(j);
        let mj = grid.ring_count(j);
        let mut g = vec![Complex64::new(0.0, 0.0); mj];
        for ((&r, &w), s) in radii.iter().zip(weights).zip(&spectra) {
            let coef = w * r * 2.0 * PI * (1.0 - rho * rho) / (1.0 - r * r * rho * rho);
            let x = r * rho;
            g[0] += s[0] * coef;
            let mut pw = 1.0;
            for k in 1..=half {
                pw *= x;
                if pw < 1e-18 {
                    break;
                }
                let c = if 2 * k == m { 0.5 * coef * pw } else { coef * pw };
                g[k % mj] += s[k] * c;
                g[(mj - k % mj) % mj] += s[m - k] * c;
            }
        }
        inverse_dft(&mut g);
        for (idx, v) in g.iter().enumerate() {
            let z0 = Complex64::from_polar(rho, 2.0 * PI * idx as f64 / mj as f64);
            out.push((z0, v.re));
        }
    }
    out
}

fn poisson_sup(
    space: &NormSpec,
    f: &TrigPolynomial,
    q: f64,
    grid: &PoissonGrid,
    sampling: &DiscSampling,
) -> Result<(f64, Complex64), FunctionalError> {
    let field = RingField::gradient(space, f, sampling, GradientMode::Full)?;
    let data = field.weighted(q, |r| (1.0 - r * r).powf(q - 1.0));
    let vals = poisson_balayage(&field.radii, &field.weights, &data, grid);
    let mut best = (0.0f64, Complex64::new(0.0, 0.0));
    for (z0, v) in vals {
        if v > best.0 {
            best = (v, z0);
        }
    }
    Ok(best)
}

/// `sup_{z0} int_D (1-|z|^2)^(q-1) ||grad f(z)||^q P_{z0}(z) dA(z)` at the
/// default sampling for the degree of `f`.
pub fn carleson_poisson(
    space: &NormSpec,
    f: &TrigPolynomial,
    q: f64,
    grid: &PoissonGrid,
) -> Result<CarlesonReport, FunctionalError> {
    carleson_poisson_with(space, f, q, grid, &DiscSampling::for_degree(f.degree()))
}

/// As [`carleson_poisson`] with explicit sampling; the error estimate compares
/// against one coarser sampling level.
pub fn carleson_poisson_with(
    space: &NormSpec,
    f: &TrigPolynomial,
    q: f64,
    grid: &PoissonGrid,
    sampling: &DiscSampling,
) -> Result<CarlesonReport, FunctionalError> {
    check_gradient_q(q)?;
    let (value, z0) = poisson_sup(space, f, q, grid, sampling)?;
    let (coarse, _) = poisson_sup(space, f, q, grid, &sampling.coarsened())?;
    Ok(CarlesonReport {
        functional: "carleson_poisson",
        q,
        value,
        rooted: value.powf(1.0 / q),
        argmax: Location::point(z0),
        grid: GridMeta::Poisson {
            z0_levels: grid.levels,
            angles: grid.angles,
            sampling: *sampling,
        },
        error_estimate: (value - coarse).abs(),
    })
}

/// Normalized tent mass `|I|^-1 int_{T(I)} (1-|z|)^(q-1) ||grad f||^q dA` of one arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TentValue {
    pub depth: usize,
    /// Normalized arclength of the start point, in `[0, 1)`.
    pub start: f64,
    pub length: f64,
    pub value: f64,
}

impl TentValue {
    pub fn contains(&self, theta: f64) -> bool {
        let t = (theta / (2.0 * PI)).rem_euclid(1.0);
        (t - self.start).rem_euclid(1.0) <= self.length + 1e-12 || self.length >= 1.0
    }
}

/// Sampling used by the tent functionals: at least the default for the degree,
/// fine enough that arc endpoints are nodes, and deep enough radially.
pub fn tent_sampling(arcs: &ArcGrid, degree: u64) -> DiscSampling {
    let base = DiscSampling::for_degree(degree);
    DiscSampling {
        radial_levels: base.radial_levels.max(arcs.max_depth + 6),
        order: base.order,
        angular: base.angular.max(arcs.min_nodes()),
    }
}

/// Every tent of `arcs`, in [`ArcGrid`] order.
pub fn tent_values(
    space: &NormSpec,
    f: &TrigPolynomial,
    q: f64,
    arcs: &ArcGrid,
    sampling: &DiscSampling,
) -> Result<Vec<TentValue>, FunctionalError> {
    check_gradient_q(q)?;
    arcs.validate()?;
    let m = sampling.angular;
    if m % arcs.min_nodes() != 0 {
        return Err(FunctionalError::InvalidGrid(format!(
            "angular resolution {m} must be a multiple of {}",
            arcs.min_nodes()
        )));
    }
    if sampling.radial_levels <= arcs.max_depth {
        return Err(FunctionalError::InvalidGrid(
            "radial levels must exceed the arc depth".into(),
        ));
    }
    let field = RingField::gradient(space, f, sampling, GradientMode::Full)?;
    let data = field.weighted(q, |r| (1.0 - r).powf(q - 1.0));
    let layout = arcs.arcs(m);
    let mut out = vec![
        TentValue {
            depth: 0,
            start: 0.0,
            length: 1.0,
            value: 0.0
        };
        layout.len()
    ];
    let mut acc = vec![0.0; m];
    let mut prefix = vec![0.0; 2 * m + 1];
    let order = sampling.order;
    for panel in (0..sampling.radial_levels).rev() {
        for i in panel * order..(panel + 1) * order {
            let w = field.weights[i] * field.radii[i];
            for (a, v) in acc.iter_mut().zip(&data[i]) {
                *a += w * v;
            }
        }
        if panel > arcs.max_depth {
            continue;
        }
        for n in 0..2 * m {
            prefix[n + 1] = prefix[n] + acc[n % m];
        }
        for (slot, &(depth, start, span)) in out.iter_mut().zip(&layout) {
            if depth != panel {
                continue;
            }
            let sum = prefix[start + span + 1] - prefix[start];
            let ends = 0.5 * (acc[start] + acc[(start + span) % m]);
            let integral = (sum - ends) * 2.0 * PI / m as f64;
            let length = span as f64 / m as f64;
            *slot = TentValue {
                depth,
                start: start as f64 / m as f64,
                length,
                value: integral / length,
            };
        }
    }
    Ok(out)
}

fn tent_sup(tents: &[TentValue]) -> (f64, Location) {
    let mut best = (0.0, Location::Arc { depth: 0, start: 0.0, length: 1.0 });
    for t in tents {
        if t.value > best.0 {
            best = (
                t.value,
                Location::Arc {
                    depth: t.depth,
                    start: t.start,
                    length: t.length,
                },
            );
        }
    }
    best
}

/// `sup_I |I|^-1 int_{T(I)} (1-|z|)^(q-1) ||grad f||^q dA` over the arcs of `arcs`.
pub fn carleson_tent(
    space: &NormSpec,
    f: &TrigPolynomial,
    q: f64,
    arcs: &ArcGrid,
) -> Result<CarlesonReport, FunctionalError> {
    carleson_tent_with(space, f, q, arcs, &tent_sampling(arcs, f.degree()))
}

pub fn carleson_tent_with(
    space: &NormSpec,
    f: &TrigPolynomial,
    q: f64,
    arcs: &ArcGrid,
    sampling: &DiscSampling,
) -> Result<CarlesonReport, FunctionalError> {
    let (value, argmax) = tent_sup(&tent_values(space, f, q, arcs, sampling)?);
    let mut coarse = *sampling;
    coarse.radial_levels = (sampling.radial_levels - 1).max(arcs.max_depth + 1);
    if (sampling.angular / 2) % arcs.min_nodes() == 0 {
        coarse.angular = sampling.angular / 2;
    }
    let (coarse_value, _) = tent_sup(&tent_values(space, f, q, arcs, &coarse)?);
    Ok(CarlesonReport {
        functional: "carleson_tent",
        q,
        value,
        rooted: value.powf(1.0 / q),
        argmax,
        grid: GridMeta::Tent {
            arcs: *arcs,
            sampling: *sampling,
        },
        error_estimate: (value - coarse_value).abs(),
    })
}

/// Rooted maximal tent average over the arcs containing `e^{i theta}`.
pub fn c_q_pointwise(
    space: &NormSpec,
    f: &TrigPolynomial,
    q: f64,
    theta: f64,
    arcs: &ArcGrid,
) -> Result<f64, FunctionalError> {
    let tents = tent_values(space, f, q, arcs, &tent_sampling(arcs, f.degree()))?;
    Ok(c_q_from_tents(&tents, q, theta))
}

/// [`c_q_pointwise`] from precomputed tents.
pub fn c_q_from_tents(tents: &[TentValue], q: f64, theta: f64) -> f64 {
    tents
        .iter()
        .filter(|t| t.contains(theta))
        .map(|t| t.value)
        .fold(0.0, f64::max)
        .powf(1.0 / q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc_harmonics::{poisson_kernel_raw, random_polynomial};
    use crate::functionals::AngularLayout;
    use crate::quadrature::disc_rule;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_has_zero_carleson_norms() {
        let sp = NormSpec::lp(2.0, 2).unwrap();
        let f = TrigPolynomial::constant(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        assert_eq!(carleson_poisson(&sp, &f, 2.0, &PoissonGrid::new(3)).unwrap().value, 0.0);
        assert_eq!(carleson_tent(&sp, &f, 2.0, &ArcGrid::new(3)).unwrap().value, 0.0);
        assert_eq!(c_q_pointwise(&sp, &f, 2.0, 0.3, &ArcGrid::new(3)).unwrap(), 0.0);
    }

    #[test]
    fn linear_function_origin_term() {
        let sp = NormSpec::lp(2.0, 2).unwrap();
        let a = vec![c(1.0, 0.5), c(0.0, -1.0)];
        let na2 = sp.norm(&a).unwrap().powi(2);
        let f = TrigPolynomial::monomial(1, a);
        let s = DiscSampling { radial_levels: 30, order: 6, angular: 64 };
        let rep = carleson_poisson_with(&sp, &f, 2.0, &PoissonGrid::new(4), &s).unwrap();
        assert!(rep.value >= 2.0 * PI * na2 * (1.0 - 1e-9));
        let origin = carleson_poisson_with(&sp, &f, 2.0, &PoissonGrid::new(0), &s).unwrap();
        assert!((origin.value - 2.0 * PI * na2).abs() < 1e-9 * origin.value);
    }

    #[test]
    fn analytic_scalar_origin_term() {
        let sp = NormSpec::lp(2.0, 1).unwrap();
        let f = random_polynomial(12, 0.5, 1, 6, true);
        let exact: f64 = 4.0
            * PI
            * (1..=12)
                .map(|k| k as f64 * f.coefficient(k)[0].norm_sqr() / (k as f64 + 1.0))
                .sum::<f64>();
        let s = DiscSampling { radial_levels: 30, order: 8, angular: 128 };
        let v = carleson_poisson_with(&sp, &f, 2.0, &PoissonGrid::new(0), &s).unwrap().value;
        assert!((v - exact).abs() < 1e-6 * exact, "{v} {exact}");
    }

    #[test]
    fn balayage_matches_direct_quadrature() {
        let sp = NormSpec::lp(3.0, 2).unwrap();
        let f = random_polynomial(4, 0.0, 2, 12, false);
        let s = DiscSampling { radial_levels: 8, order: 4, angular: 256 };
        let field = RingField::gradient(&sp, &f, &s, GradientMode::Full).unwrap();
        let data = field.weighted(2.0, |r| 1.0 - r * r);
        let grid = PoissonGrid::new(2);
        let vals = poisson_balayage(&field.radii, &field.weights, &data, &grid);
        let rule = disc_rule(256, 8, 4).unwrap();
        for &(z0, v) in vals.iter().step_by(5) {
            let direct = rule.integrate(|&z| {
                let g = f.gradient(crate::DiscPoint::new(z).unwrap()).unwrap().norm(&sp);
                (1.0 - z.norm_sqr()) * g * g * poisson_kernel_raw(z0, z)
            });
            assert!((v - direct).abs() < 1e-9 * direct, "{z0}: {v} vs {direct}");
        }
    }

    #[test]
    fn tent_sup_equals_pointwise_sup() {
        let sp = NormSpec::lp(1.5, 2).unwrap();
        let f = random_polynomial(6, 0.0, 2, 40, false);
        let arcs = ArcGrid::new(3);
        let rep = carleson_tent(&sp, &f, 2.0, &arcs).unwrap();
        let s = tent_sampling(&arcs, f.degree());
        let tents = tent_values(&sp, &f, 2.0, &arcs, &s).unwrap();
        let m = arcs.min_nodes() * 4;
        let sup = (0..m)
            .map(|j| c_q_from_tents(&tents, 2.0, 2.0 * PI * j as f64 / m as f64))
            .fold(0.0, f64::max);
        assert!((sup - rep.rooted).abs() < 1e-12 * rep.rooted);
        for j in 0..m {
            assert!(c_q_from_tents(&tents, 2.0, 2.0 * PI * j as f64 / m as f64) <= rep.rooted);
        }
    }

    #[test]
    fn full_circle_tent_against_origin_term() {
        let sp = NormSpec::lp(2.0, 1).unwrap();
        let f = random_polynomial(8, 0.0, 1, 41, false);
        let arcs = ArcGrid::new(3);
        let s = tent_sampling(&arcs, f.degree());
        let t = tent_values(&sp, &f, 2.0, &arcs, &s).unwrap()[0].value;
        let p = carleson_poisson_with(&sp, &f, 2.0, &PoissonGrid::new(0), &s).unwrap().value;
        let ratio = p / t;
        assert!((1.0..=2.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn homogeneity_and_rotation() {
        let sp = NormSpec::lp(3.0, 2).unwrap();
        let f = random_polynomial(6, 0.5, 2, 50, true);
        let grid = PoissonGrid::new(3);
        let arcs = ArcGrid::new(3);
        let lam = c(-1.5, 2.0);
        let g = f.scaled(lam);
        for q in [1.5, 2.0, 3.0] {
            let a = carleson_poisson(&sp, &f, q, &grid).unwrap().rooted;
            let b = carleson_poisson(&sp, &g, q, &grid).unwrap().rooted;
            assert!((b - lam.norm() * a).abs() < 1e-12 * b);
            let a = carleson_tent(&sp, &f, q, &arcs).unwrap().rooted;
            let b = carleson_tent(&sp, &g, q, &arcs).unwrap().rooted;
            assert!((b - lam.norm() * a).abs() < 1e-12 * b);
        }
        let alpha = 2.0 * PI * 3.0 / 8.0;
        let h = f.rotated(alpha);
        let a = carleson_poisson(&sp, &f, 2.0, &grid).unwrap().value;
        let b = carleson_poisson(&sp, &h, 2.0, &grid).unwrap().value;
        assert!((a - b).abs() < 1e-12 * a);
        let a = carleson_tent(&sp, &f, 2.0, &arcs).unwrap().value;
        let b = carleson_tent(&sp, &h, 2.0, &arcs).unwrap().value;
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn grid_monotonicity() {
        let sp = NormSpec::lp(2.0, 1).unwrap();
        let f = random_polynomial(16, 0.0, 1, 51, false);
        let s = DiscSampling::for_degree(16);
        let mut last = 0.0;
        for levels in 0..7 {
            let v = carleson_poisson_with(&sp, &f, 2.0, &PoissonGrid::new(levels), &s).unwrap().value;
            assert!(v >= last);
            last = v;
        }
        let mut last = 0.0;
        for depth in 1..6 {
            let arcs = ArcGrid::new(depth);
            let s = tent_sampling(&ArcGrid::new(6), 16);
            let v = tent_sup(&tent_values(&sp, &f, 2.0, &arcs, &s).unwrap()).0;
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn ray_layout() {
        let sp = NormSpec::lp(2.0, 1).unwrap();
        let f = random_polynomial(4, 0.0, 1, 52, false);
        let s = DiscSampling::for_degree(4);
        let ray = PoissonGrid { levels: 3, angles: AngularLayout::Ray };
        let full = carleson_poisson_with(&sp, &f, 2.0, &PoissonGrid::new(3), &s).unwrap();
        let r = carleson_poisson_with(&sp, &f, 2.0, &ray, &s).unwrap();
        assert!(r.value <= full.value);
    }

    #[test]
    fn invalid_inputs() {
        let sp = NormSpec::lp(2.0, 1).unwrap();
        let f = random_polynomial(4, 0.0, 1, 52, false);
        assert!(carleson_poisson(&sp, &f, 1.0, &PoissonGrid::new(2)).is_err());
        let bad = DiscSampling { radial_levels: 2, order: 4, angular: 64 };
        assert!(carleson_tent_with(&sp, &f, 2.0, &ArcGrid::new(3), &bad).is_err());
        let wrong = NormSpec::lp(2.0, 2).unwrap();
        assert!(carleson_poisson(&wrong, &f, 2.0, &PoissonGrid::new(2)).is_err());
    }
}
