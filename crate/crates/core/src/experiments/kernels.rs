//! Half-plane kernel checks: the convolution identity, the decay bound and
//! the operator-norm probe of the cone operator.

use super::stats::max;
use super::{Cell, Comparison, CorpusConfig, Study, StudyConfig, StudyError, StudyReport};
use crate::halfplane_kernels::{convolve_check, decay_sweep, op_norm_estimate, ConvolveResolution, ProbeConfig};

pub struct KernelStudy;

const COLUMNS: &[&str] = &["section", "level", "s", "t", "x", "q", "value", "reference", "error"];

const CONVOLVE_ST: [f64; 3] = [0.5, 1.0, 2.0];
const CONVOLVE_X: [f64; 3] = [0.0, 3.0, 10.0];
const DENSITIES: [usize; 2] = [4, 8];

impl Study for KernelStudy {
    fn name(&self) -> &'static str {
        "kernels"
    }

    fn description(&self) -> &'static str {
        "phi_s * phi_t against k_{s,t}, the sup of |k| (s+t+|x|)^3 / (s t), and operator-norm estimates of the cone \
         operator (corpus.count = random trials, refine + 1 = probe resolutions)"
    }

    fn defaults(&self) -> StudyConfig {
        StudyConfig {
            seed: Some(0),
            corpus: Some(CorpusConfig {
                count: 32,
                degrees: vec![1],
                decays: vec![0.0],
            }),
            q: Some(vec![1.5, 2.0, 3.0]),
            refine: Some(2),
            ..StudyConfig::named(self.name())
        }
    }

    fn execute(&self, config: &StudyConfig) -> Result<StudyReport, StudyError> {
        let mut report = StudyReport::new(config, COLUMNS);
        let orders = [16, 32];
        let mut conv_err = Vec::new();
        for (level, &order) in orders.iter().enumerate() {
            let mut errs = Vec::new();
            for &s in &CONVOLVE_ST {
                for &t in &CONVOLVE_ST {
                    for &x in &CONVOLVE_X {
                        let c = convolve_check(s, t, x, ConvolveResolution { order })?;
                        errs.push(c.relative_error);
                        report.push(vec![
                            "convolve".into(),
                            level.into(),
                            s.into(),
                            t.into(),
                            x.into(),
                            Cell::Null,
                            c.numeric.into(),
                            c.closed_form.into(),
                            c.relative_error.into(),
                        ]);
                    }
                }
            }
            conv_err.push(max(&errs));
        }
        report.env("convolve_orders", orders);
        report.gate(
            "convolve.rel_error",
            "max relative error of the numeric convolution against the closed form",
            Comparison::Le,
            1e-6,
            &conv_err,
        );

        let mut sups = Vec::new();
        for (level, &density) in DENSITIES.iter().enumerate() {
            let sw = decay_sweep(density)?;
            let (s, t, x) = sw.argmax;
            report.push(vec![
                "decay".into(),
                level.into(),
                s.into(),
                t.into(),
                x.into(),
                Cell::Null,
                sw.sup.into(),
                Cell::Null,
                Cell::Null,
            ]);
            report.summary.insert(format!("decay.density{density}.points"), sw.points as f64);
            sups.push(sw.sup);
        }
        report.env("decay_densities", DENSITIES);
        let finite: Vec<f64> = sups.iter().map(|s| if s.is_finite() { 1.0 } else { 0.0 }).collect();
        report.gate("decay.finite", "1 if the sampled sup is finite", Comparison::Ge, 1.0, &finite);
        let (lo, hi) = (sups[0], sups[sups.len() - 1]);
        report.gate(
            "decay.stability",
            "max(sup_fine / sup_coarse, sup_coarse / sup_fine) over the two densities",
            Comparison::Le,
            2.0,
            &[(hi / lo).max(lo / hi)],
        );

        let probe = ProbeConfig {
            resolutions: config.refine() + 1,
            ..ProbeConfig::default()
        };
        report.env("probe", probe);
        let trials = config.corpus()?.count;
        for &q in config.qs() {
            let rows = op_norm_estimate(q, &probe, trials, config.seed())?;
            for r in &rows {
                report.push(vec![
                    "opnorm".into(),
                    r.resolution.into(),
                    Cell::Null,
                    Cell::Null,
                    Cell::Null,
                    q.into(),
                    r.estimate.into(),
                    Cell::Null,
                    Cell::Null,
                ]);
            }
            let first = rows[0].estimate;
            let ratios: Vec<f64> = rows[1..].iter().map(|r| r.estimate / first).collect();
            if !ratios.is_empty() {
                report.gate(
                    &format!("opnorm.q{q}"),
                    "estimate at the finest resolution over the estimate at the coarsest",
                    Comparison::Le,
                    2.0,
                    &ratios,
                );
            }
        }
        report.notes.push(
            "opnorm rows are lower bounds ||Phi h||_q / ||h||_q maximised over random inputs on a truncated cone lattice".into(),
        );
        Ok(report)
    }
}
