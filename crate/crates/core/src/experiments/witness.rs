//! Witnesses `f_d = sum_{k=1..d} e_k z^(2^k)` in `l^inf_d`, `l^1_d` and `l^2_d`.
//!
//! Coordinate `k` of `f_d(e^{ia} z)` is that of `f_d(z)` times a unimodular
//! phase, and `l^p` norms ignore such phases. Every integrand here is
//! therefore radial (or rotation invariant in `z0`), so a single ray of `z0`
//! per ring and a coarse angular ring resolution are exact.

use num_complex::Complex64;

use super::stats::{band, min_step_ratio};
use super::{Cell, Comparison, Study, StudyConfig, StudyError, StudyReport};
use crate::disc_harmonics::{lacunary_polynomial, TrigPolynomial};
use crate::functionals::{bmo_poisson_q, carleson_poisson_with, AngularLayout, DiscSampling, PoissonGrid};
use crate::normed_spaces::{Exponent, NormSpec};

pub struct WitnessStudy;

const COLUMNS: &[&str] = &["level", "p", "d", "carleson", "carleson_error", "bmo_poisson", "r", "r_prime"];

pub fn witness_polynomial(d: usize) -> Result<TrigPolynomial, StudyError> {
    let terms: Vec<Vec<Complex64>> = (0..d)
        .map(|k| {
            let mut v = vec![Complex64::new(0.0, 0.0); d];
            v[k] = Complex64::new(1.0, 0.0);
            v
        })
        .collect();
    Ok(lacunary_polynomial(&terms)?)
}

struct Resolution {
    z0: PoissonGrid,
    sampling: DiscSampling,
    bmo_z0: PoissonGrid,
}

fn resolution(config: &StudyConfig, d: usize, level: usize) -> Resolution {
    let ray = |levels| PoissonGrid {
        levels,
        angles: AngularLayout::Ray,
    };
    Resolution {
        z0: ray(config.grid.j.unwrap_or(d + 3) + level),
        sampling: DiscSampling {
            radial_levels: d + 8 + level,
            order: 6,
            angular: config.grid.m.unwrap_or(64) << level,
        },
        bmo_z0: ray(7 + level),
    }
}

impl Study for WitnessStudy {
    fn name(&self) -> &'static str {
        "witness"
    }

    fn description(&self) -> &'static str {
        "growth of carleson / bmo^2 (l^inf) and bmo^2 / carleson (l^1) for lacunary witnesses, with an l^2 control"
    }

    fn defaults(&self) -> StudyConfig {
        StudyConfig {
            dims: Some(vec![2, 4, 8, 16]),
            p: Some(vec![Exponent(f64::INFINITY), Exponent(1.0), Exponent(2.0)]),
            refine: Some(1),
            ..StudyConfig::named(self.name())
        }
    }

    fn execute(&self, config: &StudyConfig) -> Result<StudyReport, StudyError> {
        let dims = config.dims();
        if dims.len() < 3 {
            return Err(StudyError::InvalidConfig("witness study needs at least 3 dimensions".into()));
        }
        let levels = config.refine() + 1;
        let mut report = StudyReport::new(config, COLUMNS);
        for p in config.ps() {
            for &d in dims {
                let space = NormSpec::lp(p, d)?;
                let f = witness_polynomial(d)?;
                for level in 0..levels {
                    let res = resolution(config, d, level);
                    let c = carleson_poisson_with(&space, &f, 2.0, &res.z0, &res.sampling)?;
                    let b = bmo_poisson_q(&space, &f, 2.0, &res.bmo_z0)?;
                    report.push(vec![
                        level.into(),
                        p.into(),
                        d.into(),
                        c.value.into(),
                        c.error_estimate.into(),
                        b.into(),
                        (c.value / (b * b)).into(),
                        (b * b / c.value).into(),
                    ]);
                    if p == config.ps()[0] {
                        report.env(
                            &format!("d{d}.level{level}"),
                            serde_json::json!({"z0": res.z0, "sampling": res.sampling, "bmo_z0": res.bmo_z0}),
                        );
                    }
                }
            }
        }
        summarize(&mut report, config, levels);
        report.notes.push(
            "||f_d||_{L^inf(l^inf)} = 1 bounds the BMO side while the Carleson side grows like sum ||e_k||^2 = d \
             (lacunary estimate), so R = carleson / bmo^2 grows in l^inf_d; dually bmo^2 / carleson grows in l^1_d"
                .into(),
        );
        Ok(report)
    }
}

fn summarize(report: &mut StudyReport, config: &StudyConfig, levels: usize) {
    let series = |report: &StudyReport, p: f64, level: usize, col: &str| {
        let (il, ip) = (report.column("level").unwrap(), report.column("p").unwrap());
        report.values(col, |r| r[il] == Cell::Int(level as i64) && r[ip] == Cell::Num(p))
    };
    for p in config.ps() {
        let (label, col) = if p.is_infinite() {
            ("linf", "r")
        } else if p == 1.0 {
            ("l1", "r_prime")
        } else if p == 2.0 {
            ("l2", "r")
        } else {
            continue;
        };
        let per_level: Vec<Vec<f64>> = (0..levels).map(|l| series(report, p, l, col)).collect();
        for (l, s) in per_level.iter().enumerate() {
            report.summary.insert(format!("{label}.level{l}.growth"), s[s.len() - 1] / s[0]);
            report.summary.insert(format!("{label}.level{l}.band"), band(s));
        }
        if label == "l2" {
            let bands: Vec<f64> = per_level.iter().map(|s| band(s)).collect();
            report.gate("l2.flat", "max / min of carleson / bmo^2 across d", Comparison::Le, 2.0, &bands);
            continue;
        }
        let steps: Vec<f64> = per_level.iter().map(|s| min_step_ratio(s)).collect();
        let growth: Vec<f64> = per_level.iter().map(|s| s[s.len() - 1] / s[0]).collect();
        report.gate(
            &format!("{label}.increasing"),
            &format!("smallest ratio of consecutive {col} values (> 1 iff increasing in d)"),
            Comparison::Gt,
            1.0,
            &steps,
        );
        report.gate(
            &format!("{label}.growth"),
            &format!("{col} at the largest d over {col} at the smallest d"),
            Comparison::Ge,
            4.0,
            &growth,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_layout_matches_full_grid_for_witnesses() {
        for p in [1.0, 2.0, f64::INFINITY] {
            let space = NormSpec::lp(p, 3).unwrap();
            let f = witness_polynomial(3).unwrap();
            let s = DiscSampling::for_degree(8);
            let full = carleson_poisson_with(&space, &f, 2.0, &PoissonGrid::new(4), &s).unwrap();
            let ray = carleson_poisson_with(
                &space,
                &f,
                2.0,
                &PoissonGrid {
                    levels: 4,
                    angles: AngularLayout::Ray,
                },
                &s,
            )
            .unwrap();
            assert!((full.value - ray.value).abs() <= 1e-12 * full.value, "{p}");
            let bf = bmo_poisson_q(&space, &f, 2.0, &PoissonGrid::new(4)).unwrap();
            let br = bmo_poisson_q(&space, &f, 2.0, &PoissonGrid { levels: 4, angles: AngularLayout::Ray }).unwrap();
            assert!((bf - br).abs() <= 1e-12 * bf, "{p}");
        }
    }

    #[test]
    fn coarse_angular_sampling_is_exact_on_radial_data() {
        let space = NormSpec::lp(f64::INFINITY, 4).unwrap();
        let f = witness_polynomial(4).unwrap();
        let grid = PoissonGrid { levels: 5, angles: AngularLayout::Ray };
        let a = DiscSampling { radial_levels: 12, order: 6, angular: 16 };
        let b = DiscSampling { angular: 256, ..a };
        let va = carleson_poisson_with(&space, &f, 2.0, &grid, &a).unwrap().value;
        let vb = carleson_poisson_with(&space, &f, 2.0, &grid, &b).unwrap().value;
        assert!((va - vb).abs() <= 1e-12 * vb);
    }

    #[test]
    fn small_run_has_all_gates() {
        let c = StudyConfig {
            dims: Some(vec![1, 2, 3]),
            ..StudyConfig::named("witness")
        };
        let r = WitnessStudy.run(&c).unwrap();
        assert_eq!(r.rows.len(), 3 * 3 * 2);
        for g in ["linf.increasing", "linf.growth", "l1.increasing", "l1.growth", "l2.flat"] {
            assert!(r.gate_named(g).is_some(), "{g}");
        }
        let mut bad = c;
        bad.dims = Some(vec![2, 4]);
        assert!(WitnessStudy.run(&bad).is_err());
    }
}
