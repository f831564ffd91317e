//! Lacunary series `g = sum_k 2^k a_k z^(2^k)`: weighted Poisson sup of
//! `||g||^q` against `sum_k ||a_k||^q`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::stats::{describe, log_log_slope, max};
use super::{item_seed, Cell, Comparison, CorpusConfig, Study, StudyConfig, StudyError, StudyReport};
use crate::disc_harmonics::{lacunary_polynomial, TrigPolynomial};
use crate::functionals::{poisson_balayage, DiscSampling, FunctionalError, PoissonGrid, RingField};
use crate::normed_spaces::{Exponent, NormSpec};

pub struct LacunaryStudy;

const COLUMNS: &[&str] = &["level", "p", "q", "m", "family", "seed", "lhs", "rhs", "ratio"];

/// `sup_{z0} int_D (1-|z|)^(q-1) ||g(z)||^q P_{z0}(z) dA(z)` over `grid`.
pub fn weighted_value_sup(
    space: &NormSpec,
    g: &TrigPolynomial,
    q: f64,
    grid: &PoissonGrid,
    sampling: &DiscSampling,
) -> Result<f64, FunctionalError> {
    let field = RingField::values(space, g, sampling)?;
    let data = field.weighted(q, |r| (1.0 - r).powf(q - 1.0));
    Ok(poisson_balayage(&field.radii, &field.weights, &data, grid)
        .into_iter()
        .map(|(_, v)| v)
        .fold(0.0, f64::max))
}

fn unit(m: usize, k: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); m];
    v[k] = Complex64::new(1.0, 0.0);
    v
}

fn families(m: usize, count: usize, seed: u64, cell: usize) -> Vec<(String, Option<u64>, Vec<Vec<Complex64>>)> {
    let mut out = vec![
        ("unit".to_string(), None, (0..m).map(|k| unit(m, k)).collect()),
        (
            "single".to_string(),
            None,
            (0..m)
                .map(|k| if k == 0 { unit(m, 0) } else { vec![Complex64::new(0.0, 0.0); m] })
                .collect(),
        ),
    ];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..count {
        let seed = item_seed(seed, cell, i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = (0..m)
            .map(|_| {
                (0..m)
                    .map(|_| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(re * s, im * s)
                    })
                    .collect()
            })
            .collect();
        out.push(("random".to_string(), Some(seed), a));
    }
    out
}

impl Study for LacunaryStudy {
    fn name(&self) -> &'static str {
        "lacunary"
    }

    fn description(&self) -> &'static str {
        "two-sided comparison of the weighted Poisson sup of a lacunary series with the coefficient sum, over m, q and l^p_m \
         (dims = lengths m; corpus.count = random coefficient sets per cell; corpus degrees and decays are unused)"
    }

    fn defaults(&self) -> StudyConfig {
        StudyConfig {
            seed: Some(0),
            dims: Some((3..=8).collect()),
            corpus: Some(CorpusConfig {
                count: 5,
                degrees: vec![1],
                decays: vec![0.0],
            }),
            q: Some(vec![2.0, 3.0]),
            p: Some(vec![Exponent(2.0), Exponent(3.0)]),
            refine: Some(1),
            ..StudyConfig::named(self.name())
        }
    }

    fn execute(&self, config: &StudyConfig) -> Result<StudyReport, StudyError> {
        let count = config.corpus()?.count;
        let levels = config.refine() + 1;
        let mut report = StudyReport::new(config, COLUMNS);
        for &m in config.dims() {
            if m > 10 {
                return Err(StudyError::InvalidConfig(format!("lacunary length {m} exceeds 10")));
            }
        }
        let mut cell = 0;
        for p in config.ps() {
            for &q in config.qs() {
                for &m in config.dims() {
                    let space = NormSpec::lp(p, m)?;
                    let degree = 1u64 << m;
                    for (family, seed, a) in families(m, count, config.seed(), cell) {
                        let scaled: Vec<Vec<Complex64>> = a
                            .iter()
                            .enumerate()
                            .map(|(k, v)| v.iter().map(|x| x * (1u64 << (k + 1)) as f64).collect())
                            .collect();
                        let g = lacunary_polynomial(&scaled)?;
                        let rhs: f64 = a.iter().map(|v| space.norm_unchecked(v).powf(q)).sum();
                        for level in 0..levels {
                            let mut sampling = DiscSampling::for_degree(degree);
                            if let Some(mm) = config.grid.m {
                                sampling.angular = mm;
                            }
                            for _ in 0..level {
                                sampling = sampling.refined();
                            }
                            let grid = PoissonGrid::new(config.grid.j.unwrap_or(m + 3) + level);
                            let lhs = weighted_value_sup(&space, &g, q, &grid, &sampling)?;
                            report.push(vec![
                                level.into(),
                                p.into(),
                                q.into(),
                                m.into(),
                                family.as_str().into(),
                                seed.into(),
                                lhs.into(),
                                rhs.into(),
                                (lhs / rhs).into(),
                            ]);
                        }
                    }
                    cell += 1;
                }
            }
        }
        summarize(&mut report, config, levels);
        report.notes.push(
            "lhs = sup_z0 int (1-|z|)^(q-1) ||g||^q P_z0 dA for g = sum_k 2^k a_k z^(2^k); rhs = sum_k ||a_k||^q; \
             trend slopes regress ln(ratio) on ln(2^m), pooling the unit and random families"
                .into(),
        );
        Ok(report)
    }
}

fn summarize(report: &mut StudyReport, config: &StudyConfig, levels: usize) {
    let col = |r: &StudyReport, n: &str| r.column(n).unwrap();
    let (il, ip, iq, im, ifam) = (col(report, "level"), col(report, "p"), col(report, "q"), col(report, "m"), col(report, "family"));
    let iratio = col(report, "ratio");
    let mut worst = Vec::new();
    for level in 0..levels {
        let ratios = report.values("ratio", |r| r[il] == Cell::Int(level as i64));
        describe(&mut report.summary, &format!("level{level}.ratio"), &ratios);
        worst.push(max(&ratios.iter().map(|r| r.max(1.0 / r)).collect::<Vec<_>>()));
    }
    report.gate(
        "band",
        "max over rows of max(ratio, 1 / ratio)",
        Comparison::Le,
        32.0,
        &worst,
    );
    for p in config.ps() {
        for &q in config.qs() {
            let mut slopes = Vec::new();
            for level in 0..levels {
                let (xs, ys): (Vec<f64>, Vec<f64>) = report
                    .rows
                    .iter()
                    .filter(|r| {
                        r[il] == Cell::Int(level as i64)
                            && r[ip] == Cell::Num(p)
                            && r[iq] == Cell::Num(q)
                            && r[ifam].as_str() != Some("single")
                    })
                    .map(|r| ((r[im].as_f64().unwrap()).exp2(), r[iratio].as_f64().unwrap()))
                    .unzip();
                let s = log_log_slope(&xs, &ys);
                report.summary.insert(format!("p{p}.q{q}.level{level}.slope"), s);
                slopes.push(s.abs());
            }
            report.gate(
                &format!("trend.p{p}.q{q}"),
                "|pooled OLS slope of ln ratio against ln 2^m|",
                Comparison::Lt,
                0.15,
                &slopes,
            );
        }
    }
}
