//! Deterministic integration rules on the circle, the radial interval and the disc.
//!
//! Conventions: the circle rule integrates against the normalized measure `dm`
//! (total mass 1); the disc rule integrates against plain Lebesgue area `dA`
//! (total mass `pi`, up to the radial truncation at `1 - 2^-J`).
//!
//! Radial rules are composite Gauss-Legendre on the dyadic panels
//! `[1 - 2^-j, 1 - 2^-(j+1)]`, `j = 0..J`, so that integrands whose variation
//! concentrates at the boundary see the same number of nodes per dyadic scale.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("invalid rule parameter: {0}")]
    InvalidParameter(String),
    #[error("integrand returned a non-finite value {value} at node {node}")]
    NonFinite { value: f64, node: Complex64 },
    #[error("refinement needs at least 2 levels, got {0}")]
    TooFewLevels(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Circle,
    Radial,
    Disc,
}

/// Resolution parameters of a rule. Only the fields relevant to `kind` are set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleMeta {
    pub kind: RuleKind,
    pub m: Option<usize>,
    pub j: Option<usize>,
    pub order: Option<usize>,
}

/// Nodes and strictly positive weights. `P` is `f64` for angles and radii,
/// `Complex64` for disc points.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<P> {
    nodes: Vec<P>,
    weights: Vec<f64>,
    meta: RuleMeta,
}

impl<P> QuadratureRule<P> {
    pub fn nodes(&self) -> &[P] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn meta(&self) -> RuleMeta {
        self.meta
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&P, f64)> {
        self.nodes.iter().zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Weighted sum, accumulated in node order.
    pub fn integrate<F: FnMut(&P) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// `n`-point Gauss-Legendre rule on `[-1, 1]`, nodes ascending.
///
/// Newton iteration on the three-term recurrence, started from the
/// Tricomi-type approximation `cos(pi (i - 1/4) / (n + 1/2))`.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>), QuadratureError> {
    if n == 0 {
        return Err(QuadratureError::InvalidParameter(
            "Gauss-Legendre order must be at least 1".into(),
        ));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `M` equispaced angles `2 pi j / M`, each with weight `1/M`.
pub fn circle_nodes(m: usize) -> Result<QuadratureRule<f64>, QuadratureError> {
    if m == 0 {
        return Err(QuadratureError::InvalidParameter(
            "circle rule needs M >= 1".into(),
        ));
    }
    let nodes = (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect();
    Ok(QuadratureRule {
        nodes,
        weights: vec![1.0 / m as f64; m],
        meta: RuleMeta {
            kind: RuleKind::Circle,
            m: Some(m),
            j: None,
            order: None,
        },
    })
}

/// Dyadic composite Gauss-Legendre rule on `[0, 1 - 2^-J]`.
pub fn radial_composite(j: usize, order: usize) -> Result<QuadratureRule<f64>, QuadratureError> {
    if j == 0 {
        return Err(QuadratureError::InvalidParameter(
            "radial rule needs J >= 1".into(),
        ));
    }
    if j > 48 {
        // beyond this the outer panels fall below double precision resolution near 1
        return Err(QuadratureError::InvalidParameter(format!(
            "radial rule with J = {j} exceeds the representable panel depth (48)"
        )));
    }
    let (x, w) = gauss_legendre(order)?;
    let mut nodes = Vec::with_capacity(j * order);
    let mut weights = Vec::with_capacity(j * order);
    for level in 0..j {
        let a = 1.0 - (-(level as f64)).exp2();
        let b = 1.0 - (-(level as f64 + 1.0)).exp2();
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + half * xi);
            weights.push(half * wi);
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        meta: RuleMeta {
            kind: RuleKind::Radial,
            m: None,
            j: Some(j),
            order: Some(order),
        },
    })
}

/// Product of `circle_nodes(M)` and `radial_composite(J, order)` with the area
/// element `r dr dtheta`. Nodes are ring-major.
pub fn disc_rule(
    m: usize,
    j: usize,
    order: usize,
) -> Result<QuadratureRule<Complex64>, QuadratureError> {
    let circle = circle_nodes(m)?;
    let radial = radial_composite(j, order)?;
    let mut nodes = Vec::with_capacity(circle.len() * radial.len());
    let mut weights = Vec::with_capacity(circle.len() * radial.len());
    let dtheta = 2.0 * PI / m as f64;
    for (&r, wr) in radial.iter() {
        for &theta in circle.nodes() {
            nodes.push(Complex64::from_polar(r, theta));
            weights.push(wr * r * dtheta);
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        meta: RuleMeta {
            kind: RuleKind::Disc,
            m: Some(m),
            j: Some(j),
            order: Some(order),
        },
    })
}

/// Parameters of a rule family that can be refined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RuleParams {
    Circle { m: usize },
    Radial { j: usize, order: usize },
    Disc { m: usize, j: usize, order: usize },
}

impl RuleParams {
    /// Next resolution: angular counts double, one more dyadic panel is added
    /// (which halves the smallest radial scale).
    pub fn refined(self) -> Self {
        match self {
            RuleParams::Circle { m } => RuleParams::Circle { m: 2 * m },
            RuleParams::Radial { j, order } => RuleParams::Radial { j: j + 1, order },
            RuleParams::Disc { m, j, order } => RuleParams::Disc {
                m: 2 * m,
                j: j + 1,
                order,
            },
        }
    }

    /// Applies `f` to every node (as a point of the closed disc) with its weight.
    /// Circle nodes are passed as `e^{i theta}`, radial nodes as `r + 0i`.
    pub fn integrate<F: FnMut(Complex64) -> f64>(
        self,
        mut f: F,
    ) -> Result<f64, QuadratureError> {
        let mut acc = 0.0;
        let mut push = |z: Complex64, w: f64| -> Result<(), QuadratureError> {
            let v = f(z);
            if !v.is_finite() {
                return Err(QuadratureError::NonFinite { value: v, node: z });
            }
            acc += w * v;
            Ok(())
        };
        match self {
            RuleParams::Circle { m } => {
                for (&t, w) in circle_nodes(m)?.iter() {
                    push(Complex64::from_polar(1.0, t), w)?;
                }
            }
            RuleParams::Radial { j, order } => {
                for (&r, w) in radial_composite(j, order)?.iter() {
                    push(Complex64::new(r, 0.0), w)?;
                }
            }
            RuleParams::Disc { m, j, order } => {
                for (&z, w) in disc_rule(m, j, order)?.iter() {
                    push(z, w)?;
                }
            }
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementEstimate {
    /// Finest-level value.
    pub value: f64,
    /// `|finest - previous|`.
    pub error_estimate: f64,
    pub levels_used: usize,
}

/// Integrates at `levels` successively refined resolutions starting from `base`.
pub fn refine_and_estimate<F: FnMut(Complex64) -> f64>(
    mut integrand: F,
    base: RuleParams,
    levels: usize,
) -> Result<RefinementEstimate, QuadratureError> {
    if levels < 2 {
        return Err(QuadratureError::TooFewLevels(levels));
    }
    let mut params = base;
    let mut previous = params.integrate(&mut integrand)?;
    let mut value = previous;
    for _ in 1..levels {
        params = params.refined();
        previous = value;
        value = params.integrate(&mut integrand)?;
    }
    Ok(RefinementEstimate {
        value,
        error_estimate: (value - previous).abs(),
        levels_used: levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn circle_four_nodes() {
        let rule = circle_nodes(4).unwrap();
        let expected = [0.0, PI / 2.0, PI, 3.0 * PI / 2.0];
        for (a, b) in rule.nodes().iter().zip(expected) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
        assert!(rule.weights().iter().all(|&w| w == 0.25));
        assert_eq!(rule.total_mass(), 1.0);
    }

    #[test]
    fn circle_annihilates_nonzero_frequencies() {
        let m = 16;
        let rule = circle_nodes(m).unwrap();
        for k in 1..m as i32 {
            let re = rule.integrate(|&t| (k as f64 * t).cos());
            let im = rule.integrate(|&t| (k as f64 * t).sin());
            assert!(re.abs() < 1e-14 && im.abs() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n).unwrap();
            for deg in 0..(2 * n) {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-14, "n={n} deg={deg} got={got}");
            }
        }
    }

    #[test]
    fn radial_constant_is_exact() {
        for j in [1, 4, 10, 20] {
            let rule = radial_composite(j, 3).unwrap();
            let exact = 1.0 - (-(j as f64)).exp2();
            assert!((rule.total_mass() - exact).abs() < 1e-12);
            assert!(rule.weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn radial_linear_integrands_and_tail() {
        for j in [2, 6, 12] {
            let rule = radial_composite(j, 4).unwrap();
            let tail = (-(2.0 * j as f64 + 1.0)).exp2();
            let one_minus_r = rule.integrate(|&r| 1.0 - r);
            assert!((0.5 - one_minus_r - tail).abs() < 1e-14);
            let r = rule.integrate(|&r| r);
            let cut = 1.0 - (-(j as f64)).exp2();
            assert!((r - 0.5 * cut * cut).abs() < 1e-14);
        }
    }

    #[test]
    fn disc_area_and_moments() {
        let j = 10;
        let rule = disc_rule(32, j, 4).unwrap();
        let cut = 1.0 - (-(j as f64)).exp2();
        assert!((rule.total_mass() - PI * cut * cut).abs() < 1e-10);
        let weighted = rule.integrate(|z| 1.0 - z.norm_sqr());
        // pi/2 minus the truncated tail pi (1 - c^2)^2 / 2
        let tail = PI * (1.0 - cut * cut).powi(2) / 2.0;
        assert!((weighted - (PI / 2.0 - tail)).abs() < 1e-12);
        let re = rule.integrate(|z| z.re);
        let im = rule.integrate(|z| z.im);
        assert!(re.abs() < 1e-14 && im.abs() < 1e-14);
    }

    #[test]
    fn disc_mass_converges_geometrically() {
        let errs: Vec<f64> = (4..=10)
            .map(|j| PI - disc_rule(8, j, 2).unwrap().total_mass())
            .collect();
        for pair in errs.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!((1.9..2.1).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn rules_are_bitwise_deterministic() {
        let a = disc_rule(24, 7, 5).unwrap();
        let b = disc_rule(24, 7, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn refinement_of_one_minus_r() {
        let base = RuleParams::Radial { j: 3, order: 4 };
        let mut last = f64::INFINITY;
        for levels in 2..7 {
            let est = refine_and_estimate(|z| 1.0 - z.re, base, levels).unwrap();
            assert!(est.error_estimate < last);
            last = est.error_estimate;
            assert!((est.value - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn refinement_of_constant() {
        let est =
            refine_and_estimate(|_| 1.0, RuleParams::Circle { m: 3 }, 4).unwrap();
        assert!(est.error_estimate <= 1e-14);
        assert_eq!(est.levels_used, 4);
    }

    #[test]
    fn refinement_signals_non_finite() {
        let err = refine_and_estimate(
            |z| if z.re > 0.5 { f64::NAN } else { 1.0 },
            RuleParams::Disc { m: 8, j: 3, order: 2 },
            2,
        )
        .unwrap_err();
        assert!(matches!(err, QuadratureError::NonFinite { .. }));
        assert_eq!(
            refine_and_estimate(|_| 1.0, RuleParams::Circle { m: 3 }, 1).unwrap_err(),
            QuadratureError::TooFewLevels(1)
        );
    }

    #[test]
    fn invalid_parameters() {
        assert!(circle_nodes(0).is_err());
        assert!(radial_composite(0, 3).is_err());
        assert!(radial_composite(3, 0).is_err());
    }
}
