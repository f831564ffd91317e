//! Power-type fits of the moduli of convexity and smoothness of `l^p_d`.

use super::{Comparison, Study, StudyConfig, StudyError, StudyReport};
use crate::normed_spaces::{
    convexity_curve, power_type_fit, smoothness_curve, Exponent, ModulusCurve, NormError, NormSpec, ScalarField,
    SearchBudget,
};

pub struct ModuliStudy;

const COLUMNS: &[&str] = &["level", "p", "modulus", "x", "estimate"];

const EPS: [f64; 8] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
const TS: [f64; 5] = [0.05, 0.1, 0.2, 0.3, 0.4];

/// Search budgets by level; the last is the library default.
fn budgets(levels: usize) -> Vec<SearchBudget> {
    let full = SearchBudget::default();
    (0..levels)
        .map(|l| {
            let shift = levels - 1 - l;
            SearchBudget {
                starts: (full.starts >> (2 * shift)).max(4),
                sweeps: (full.sweeps >> shift).max(10),
                seed: full.seed,
            }
        })
        .collect()
}

impl Study for ModuliStudy {
    fn name(&self) -> &'static str {
        "moduli"
    }

    fn description(&self) -> &'static str {
        "fitted power types of delta(eps) and rho(t) for real l^p_d; l^1 must come out degenerate"
    }

    fn defaults(&self) -> StudyConfig {
        StudyConfig {
            dims: Some(vec![2]),
            p: Some([1.0, 1.5, 2.0, 3.0, 4.0].into_iter().map(Exponent).collect()),
            refine: Some(1),
            ..StudyConfig::named(self.name())
        }
    }

    fn execute(&self, config: &StudyConfig) -> Result<StudyReport, StudyError> {
        let d = config.dims()[0];
        let levels = config.refine() + 1;
        let budgets = budgets(levels);
        let mut report = StudyReport::new(config, COLUMNS);
        report.env("budgets", &budgets);
        report.env("eps", EPS);
        report.env("t", TS);
        report.env("dimension", d);
        report.env("field", ScalarField::Real);
        let mut rho_excess = vec![f64::NEG_INFINITY; levels];
        for p in config.ps() {
            let space = NormSpec::new(p, d, None, ScalarField::Real)?;
            let mut delta_fits = Vec::new();
            let mut degenerate = Vec::new();
            for (level, budget) in budgets.iter().enumerate() {
                let dc = convexity_curve(&space, &EPS, budget)?;
                let sc = smoothness_curve(&space, &TS, budget)?;
                push_curve(&mut report, level, p, "delta", &dc);
                push_curve(&mut report, level, p, "rho", &sc);
                for (t, r) in sc.abscissae.iter().zip(&sc.estimates) {
                    rho_excess[level] = rho_excess[level].max(r - t);
                }
                match power_type_fit(&dc) {
                    Ok(fit) => {
                        report.summary.insert(format!("p{p}.level{level}.delta_exponent"), fit.exponent);
                        delta_fits.push(fit.exponent);
                        degenerate.push(0.0);
                    }
                    Err(NormError::DegenerateModulus { .. }) => {
                        degenerate.push(1.0);
                    }
                    Err(e) => return Err(e.into()),
                }
                if let Ok(fit) = power_type_fit(&sc) {
                    report.summary.insert(format!("p{p}.level{level}.rho_exponent"), fit.exponent);
                }
            }
            if p == 1.0 {
                report.gate("l1.degenerate", "1 if the l^1 convexity fit is flagged degenerate", Comparison::Ge, 1.0, &degenerate);
            } else if p.is_finite() && delta_fits.len() == levels {
                let target = p.max(2.0);
                let dev: Vec<f64> = delta_fits.iter().map(|q| (q - target).abs()).collect();
                report.gate(
                    &format!("delta_exponent.p{p}"),
                    &format!("|fitted delta exponent - {target}|"),
                    Comparison::Le,
                    0.3,
                    &dev,
                );
            }
        }
        report.gate("rho_le_t", "max over t of rho(t) - t", Comparison::Le, 0.0, &rho_excess);
        Ok(report)
    }
}

fn push_curve(report: &mut StudyReport, level: usize, p: f64, kind: &str, c: &ModulusCurve) {
    for (x, e) in c.abscissae.iter().zip(&c.estimates) {
        report.push(vec![level.into(), p.into(), kind.into(), (*x).into(), (*e).into()]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budgets_grow_to_the_default() {
        let b = budgets(2);
        assert_eq!(b[1], SearchBudget::default());
        assert!(b[0].starts < b[1].starts && b[0].sweeps < b[1].sweeps);
    }

    #[test]
    fn small_run() {
        let c = StudyConfig {
            p: Some(vec![Exponent(1.0), Exponent(2.0)]),
            ..StudyConfig::named("moduli")
        };
        let r = ModuliStudy.run(&c).unwrap();
        assert!(r.gate_named("l1.degenerate").unwrap().passed);
        assert!(r.gate_named("delta_exponent.p2").unwrap().passed);
        assert!(r.gate_named("rho_le_t").unwrap().passed);
    }
}
