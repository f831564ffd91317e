//! `||G_2 f||_{L^p(T)}` against `||f - a_0||_{L^p(T)}` on random `l^2_d` corpora.

use super::stats::{describe, log_log_slope, max};
use super::{item_seed, Cell, Comparison, CorpusConfig, Study, StudyConfig, StudyError, StudyReport};
use crate::disc_harmonics::{random_polynomial, TrigPolynomial};
use crate::functionals::{g_lp, pow2_at_least, RadialSampling};
use crate::normed_spaces::{Exponent, NormSpec, SpaceDescriptor};

pub struct CotypeStudy;

const COLUMNS: &[&str] = &["level", "p", "degree", "seed", "g_lp", "boundary_lp", "ratio", "inverse_ratio"];

/// `(mean_j ||f(e^{2 pi i j / m})||^p)^(1/p)`.
pub fn boundary_lp(space: &NormSpec, f: &TrigPolynomial, p: f64, m: usize) -> f64 {
    let ring = f.sample_ring(1.0, m);
    let mean = (0..m).map(|j| space.norm_unchecked(ring.at(j)).powf(p)).sum::<f64>() / m as f64;
    mean.powf(1.0 / p)
}

fn resolution(degree: usize, level: usize) -> (RadialSampling, usize) {
    let sampling = RadialSampling {
        levels: 16 + 8 * level,
        order: 6 + 2 * level,
    };
    (sampling, pow2_at_least(4 * degree) << level)
}

impl Study for CotypeStudy {
    fn name(&self) -> &'static str {
        "cotype"
    }

    fn description(&self) -> &'static str {
        "ratios ||G_2 f||_p / ||f - a0||_p (cotype side) and their inverses (type side) on random l^2_d polynomials"
    }

    fn defaults(&self) -> StudyConfig {
        StudyConfig {
            seed: Some(0),
            space: Some(SpaceDescriptor { p: Exponent(2.0), d: 4 }),
            corpus: Some(CorpusConfig {
                count: 10,
                degrees: vec![8, 16, 32],
                decays: vec![0.5],
            }),
            p: Some(vec![Exponent(1.5), Exponent(2.0), Exponent(4.0)]),
            refine: Some(1),
            ..StudyConfig::named(self.name())
        }
    }

    fn execute(&self, config: &StudyConfig) -> Result<StudyReport, StudyError> {
        let desc = config.space.expect("defaults set the space");
        let space = NormSpec::lp(desc.p.0, desc.d)?;
        let corpus = config.corpus()?;
        let levels = config.refine() + 1;
        let mut report = StudyReport::new(config, COLUMNS);
        for p in config.ps() {
            if !(p > 1.0 && p.is_finite()) {
                return Err(StudyError::InvalidConfig(format!("boundary exponent {p} must lie in (1, inf)")));
            }
        }
        let mut cell = 0;
        for &degree in &corpus.degrees {
            for &decay in &corpus.decays {
                for i in 0..corpus.count {
                    let seed = item_seed(config.seed(), cell, i);
                    let f = random_polynomial(degree, decay, desc.d, seed, false);
                    let centred = f.without_mean();
                    for p in config.ps() {
                        for level in 0..levels {
                            let (sampling, m) = resolution(degree, level);
                            let g = g_lp(&space, &f, 2.0, p, m, &sampling)?;
                            let b = boundary_lp(&space, &centred, p, m);
                            report.push(vec![
                                level.into(),
                                p.into(),
                                degree.into(),
                                seed.into(),
                                g.into(),
                                b.into(),
                                (g / b).into(),
                                (b / g).into(),
                            ]);
                        }
                    }
                }
                cell += 1;
            }
        }
        let grids: Vec<_> = corpus
            .degrees
            .iter()
            .map(|&n| {
                let per_level: Vec<_> = (0..levels)
                    .map(|l| {
                        let (s, m) = resolution(n, l);
                        serde_json::json!({"radial": s, "circle": m})
                    })
                    .collect();
                serde_json::json!({"degree": n, "levels": per_level})
            })
            .collect();
        report.env("grids", grids);
        summarize(&mut report, config, levels);
        report.notes.push(
            "g_lp = ||G_2 f||_{L^p(T)} with G_2 f(theta)^2 = int_0^1 (1-r) ||grad f(r e^{i theta})||^2 dr; \
             boundary_lp = ||f - a0||_{L^p(T)} on the same circle grid"
                .into(),
        );
        Ok(report)
    }
}

fn summarize(report: &mut StudyReport, config: &StudyConfig, levels: usize) {
    let (il, ip, id) = (
        report.column("level").unwrap(),
        report.column("p").unwrap(),
        report.column("degree").unwrap(),
    );
    let (mut sup, mut inv_sup) = (Vec::new(), Vec::new());
    for level in 0..levels {
        let at_level = |r: &[Cell]| r[il] == Cell::Int(level as i64);
        let ratios = report.values("ratio", at_level);
        let inverse = report.values("inverse_ratio", at_level);
        describe(&mut report.summary, &format!("level{level}.ratio"), &ratios);
        describe(&mut report.summary, &format!("level{level}.inverse_ratio"), &inverse);
        sup.push(max(&ratios));
        inv_sup.push(max(&inverse));
    }
    report.gate(
        "cotype.sup",
        "max over p, N and the corpus of ||G f||_p / ||f - a0||_p",
        Comparison::Le,
        32.0,
        &sup,
    );
    report.gate(
        "type.sup",
        "max over p, N and the corpus of ||f - a0||_p / ||G f||_p",
        Comparison::Le,
        32.0,
        &inv_sup,
    );
    for p in config.ps() {
        let mut slopes = Vec::new();
        for level in 0..levels {
            let (deg, ratio): (Vec<f64>, Vec<f64>) = report
                .rows
                .iter()
                .filter(|r| r[il] == Cell::Int(level as i64) && r[ip] == Cell::Num(p))
                .map(|r| (r[id].as_f64().unwrap(), r[report.column("ratio").unwrap()].as_f64().unwrap()))
                .unzip();
            let s = log_log_slope(&deg, &ratio);
            report.summary.insert(format!("p{p}.level{level}.slope"), s);
            slopes.push(s.abs());
        }
        report.gate(
            &format!("cotype.trend.p{p}"),
            "|OLS slope of ln(||G f||_p / ||f - a0||_p) against ln N|",
            Comparison::Lt,
            0.15,
            &slopes,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn boundary_norm_of_a_monomial() {
        let sp = NormSpec::lp(2.0, 2).unwrap();
        let f = TrigPolynomial::monomial(3, vec![Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)]);
        for p in [1.5, 2.0, 4.0] {
            assert!((boundary_lp(&sp, &f, p, 16) - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn monomial_ratio_closed_form() {
        // G_2(a w^k)^2 = 4 k^2 ||a||^2 int_0^1 (1-r) r^(2k-2) dr = 4 k^2 ||a||^2 / ((2k-1) 2k)
        let sp = NormSpec::lp(2.0, 1).unwrap();
        let k = 4;
        let f = TrigPolynomial::monomial(k, vec![Complex64::new(1.0, 0.0)]);
        let g = g_lp(&sp, &f, 2.0, 2.0, 32, &RadialSampling::default()).unwrap();
        let kf = k as f64;
        let exact = (4.0 * kf * kf / ((2.0 * kf - 1.0) * 2.0 * kf)).sqrt();
        assert!((g - exact).abs() < 1e-10 * exact, "{g} {exact}");
    }

    #[test]
    fn small_run() {
        let c = StudyConfig {
            corpus: Some(CorpusConfig {
                count: 2,
                degrees: vec![4, 8],
                decays: vec![0.5],
            }),
            ..StudyConfig::named("cotype")
        };
        let r = CotypeStudy.run(&c).unwrap();
        assert_eq!(r.rows.len(), 2 * 2 * 3 * 2);
        for g in ["cotype.sup", "type.sup", "cotype.trend.p2"] {
            assert!(r.gate_named(g).is_some(), "{g}");
        }
        let mut bad = c;
        bad.p = Some(vec![Exponent(1.0)]);
        assert!(CotypeStudy.run(&bad).is_err());
    }
}
