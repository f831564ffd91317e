//! Change of variables under disc automorphisms:
//! `int ||grad (f o phi)||^2 (1-|z|^2) dA = int ||grad f(w)||^2 (1-|w|^2) P_{z0}(w) dA(w)`
//! for `phi(z) = (z + z0) / (1 + conj(z0) z)`.
//!
//! With `||grad f|| = ||f_x|| + ||f_y||` the integrand is conformally invariant
//! only for analytic (or antianalytic) `f`, so the corpus is analytic.

use num_complex::Complex64;

use super::stats::max;
use super::{item_seed, Cell, Comparison, CorpusConfig, Study, StudyConfig, StudyError, StudyReport};
use crate::disc_harmonics::{composed_gradient, poisson_kernel_disc, random_polynomial, DiscPoint, TrigPolynomial};
use crate::normed_spaces::{Exponent, NormSpec, SpaceDescriptor};
use crate::quadrature::RuleParams;

pub struct MobiusStudy;

const COLUMNS: &[&str] = &["level", "family", "seed", "z0_re", "z0_im", "lhs", "rhs", "rel_diff"];

/// Both sides of the identity on one disc rule.
pub fn mobius_sides(space: &NormSpec, f: &TrigPolynomial, z0: Complex64, rule: RuleParams) -> Result<(f64, f64), StudyError> {
    let z0p = DiscPoint::new(z0)?;
    let mut err = None;
    let lhs = rule.integrate(|z| match DiscPoint::new(z).and_then(|z| composed_gradient(f, z0p, z)) {
        Ok(g) => g.norm(space).powi(2) * (1.0 - z.norm_sqr()),
        Err(e) => {
            err = Some(e);
            0.0
        }
    })?;
    let rhs = rule.integrate(|w| {
        let wp = DiscPoint::new(w).expect("rule nodes are interior");
        match f.gradient(wp) {
            Ok(g) => g.norm(space).powi(2) * (1.0 - w.norm_sqr()) * poisson_kernel_disc(z0p, wp),
            Err(e) => {
                err = Some(e);
                0.0
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e.into());
    }
    Ok((lhs, rhs))
}

fn centres(family: &str) -> Vec<Complex64> {
    let c = Complex64::new;
    match family {
        "linear" => vec![c(0.0, 0.0), c(0.5, 0.0)],
        _ => vec![c(0.0, 0.0), c(0.3, 0.0), c(0.0, 0.5), c(-0.7, 0.0)],
    }
}

impl Study for MobiusStudy {
    fn name(&self) -> &'static str {
        "mobius"
    }

    fn description(&self) -> &'static str {
        "Moebius change of variables for the weighted Dirichlet integral on analytic polynomials, z0 in {0, 0.3, 0.5i, -0.7}"
    }

    fn defaults(&self) -> StudyConfig {
        StudyConfig {
            seed: Some(0),
            space: Some(SpaceDescriptor { p: Exponent(2.0), d: 1 }),
            corpus: Some(CorpusConfig {
                count: 10,
                degrees: vec![16],
                decays: vec![0.0],
            }),
            grid: super::GridConfig {
                j: Some(9),
                m: Some(128),
                ..Default::default()
            },
            refine: Some(1),
            ..StudyConfig::named(self.name())
        }
    }

    fn execute(&self, config: &StudyConfig) -> Result<StudyReport, StudyError> {
        let desc = config.space.expect("defaults set the space");
        let space = NormSpec::lp(desc.p.0, desc.d)?;
        if !space.is_hilbert() {
            return Err(StudyError::InvalidConfig(format!(
                "the Moebius identity needs a Hilbert target, got p = {}",
                desc.p
            )));
        }
        let corpus = config.corpus()?;
        let levels = config.refine() + 1;
        let base = RuleParams::Disc {
            m: config.grid.m.unwrap_or(128),
            j: config.grid.j.unwrap_or(9),
            order: 6,
        };
        let mut rules = vec![base];
        for _ in 1..levels {
            let r = rules.last().unwrap().refined();
            rules.push(r);
        }
        let mut items: Vec<(String, Option<u64>, TrigPolynomial)> = vec![(
            "linear".into(),
            None,
            TrigPolynomial::monomial(1, vec![Complex64::new(1.0, 0.0); desc.d]),
        )];
        let mut cell = 0;
        for &degree in &corpus.degrees {
            for &decay in &corpus.decays {
                for i in 0..corpus.count {
                    let seed = item_seed(config.seed(), cell, i);
                    items.push(("random".into(), Some(seed), random_polynomial(degree, decay, desc.d, seed, true)));
                }
                cell += 1;
            }
        }
        let mut report = StudyReport::new(config, COLUMNS);
        for (family, seed, f) in &items {
            for z0 in centres(family) {
                for (level, rule) in rules.iter().enumerate() {
                    let (lhs, rhs) = mobius_sides(&space, f, z0, *rule)?;
                    report.push(vec![
                        level.into(),
                        family.as_str().into(),
                        (*seed).into(),
                        z0.re.into(),
                        z0.im.into(),
                        lhs.into(),
                        rhs.into(),
                        ((lhs - rhs).abs() / rhs).into(),
                    ]);
                }
            }
        }
        report.environment.insert("rules".into(), serde_json::to_value(&rules).unwrap());
        summarize(&mut report, levels);
        report.notes.push(
            "lhs = int ||grad(f o phi)||^2 (1-|z|^2) dA, rhs = int ||grad f||^2 (1-|w|^2) P_z0(w) dA; \
             for f(w) = w both equal 2 pi"
                .into(),
        );
        Ok(report)
    }
}

fn summarize(report: &mut StudyReport, levels: usize) {
    let (il, ifam, ire, iim, irel) = (
        report.column("level").unwrap(),
        report.column("family").unwrap(),
        report.column("z0_re").unwrap(),
        report.column("z0_im").unwrap(),
        report.column("rel_diff").unwrap(),
    );
    let at_origin = |r: &[Cell]| r[ire] == Cell::Num(0.0) && r[iim] == Cell::Num(0.0);
    let identity: Vec<f64> = report.values("rel_diff", |r| at_origin(r));
    report.gate(
        "identity.rel_diff",
        "max relative difference at z0 = 0 (identity map), all levels",
        Comparison::Le,
        1e-12,
        &[max(&identity)],
    );
    let linear = report.values("rel_diff", |r| {
        r[il] == Cell::Int(0) && r[ifam].as_str() == Some("linear") && r[ire] == Cell::Num(0.5)
    });
    report.gate(
        "linear.rel_diff.default",
        "relative difference for f(w) = w, z0 = 0.5 at the default rule",
        Comparison::Le,
        1e-3,
        &[max(&linear)],
    );
    let default_level = report.values("rel_diff", |r| {
        r[il] == Cell::Int(0) && r[ifam].as_str() == Some("random") && !at_origin(r)
    });
    report.summary.insert("random.level0.max_rel_diff".into(), max(&default_level));
    report.gate(
        "random.rel_diff.default",
        "max relative difference over random polynomials and z0 != 0 at the default rule",
        Comparison::Le,
        1e-2,
        &[max(&default_level)],
    );
    // strict decrease of every (item, z0) series under each refinement step
    let mut worst_step: f64 = 0.0;
    let per_item = report.rows.len() / levels;
    for chunk in 0..per_item {
        let rows = &report.rows[chunk * levels..(chunk + 1) * levels];
        if at_origin(&rows[0]) {
            continue;
        }
        for w in rows.windows(2) {
            let (a, b) = (w[0][irel].as_f64().unwrap(), w[1][irel].as_f64().unwrap());
            worst_step = worst_step.max(b / a);
        }
    }
    report.summary.insert("max_refinement_step_ratio".into(), worst_step);
    report.gate(
        "rel_diff.decreasing",
        "max over items and z0 != 0 of rel_diff(refined) / rel_diff(default); < 1 iff strictly decreasing",
        Comparison::Lt,
        1.0,
        &[worst_step],
    );
    for level in 0..levels {
        let v = report.values("rel_diff", |r| r[il] == Cell::Int(level as i64) && !at_origin(r));
        report.summary.insert(format!("level{level}.max_rel_diff"), max(&v));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_map_is_exact() {
        let sp = NormSpec::lp(2.0, 1).unwrap();
        let f = random_polynomial(6, 0.0, 1, 3, true);
        let (l, r) = mobius_sides(&sp, &f, Complex64::new(0.0, 0.0), RuleParams::Disc { m: 32, j: 4, order: 4 }).unwrap();
        assert!((l - r).abs() <= 1e-12 * r);
    }

    #[test]
    fn linear_function_converges_to_two_pi() {
        let sp = NormSpec::lp(2.0, 1).unwrap();
        let f = TrigPolynomial::monomial(1, vec![Complex64::new(1.0, 0.0)]);
        let z0 = Complex64::new(0.5, 0.0);
        let coarse = mobius_sides(&sp, &f, z0, RuleParams::Disc { m: 64, j: 6, order: 6 }).unwrap();
        let fine = mobius_sides(&sp, &f, z0, RuleParams::Disc { m: 128, j: 7, order: 6 }).unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        let rel = |(l, r): (f64, f64)| (l - r).abs() / r;
        assert!(rel(coarse) <= 1e-3 && rel(fine) < rel(coarse), "{coarse:?} {fine:?}");
        assert!((fine.1 - tau).abs() < (coarse.1 - tau).abs());
    }

    #[test]
    fn non_hilbert_targets_are_rejected() {
        let c = StudyConfig {
            space: Some(SpaceDescriptor { p: Exponent(3.0), d: 2 }),
            ..StudyConfig::named("mobius")
        };
        assert!(matches!(MobiusStudy.run(&c), Err(StudyError::InvalidConfig(_))));
    }
}
