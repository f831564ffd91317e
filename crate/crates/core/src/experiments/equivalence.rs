//! Carleson functional against BMO norms on random polynomial corpora.

use serde_json::json;

use super::stats::{band, describe, log_log_slope, max};
use super::{item_seed, Cell, Comparison, CorpusConfig, Study, StudyConfig, StudyError, StudyReport};
use crate::disc_harmonics::random_polynomial;
use crate::functionals::{
    bmo_arc, bmo_poisson_q, carleson_poisson_with, log2_ceil, ArcGrid, DiscSampling, PoissonGrid,
};
use crate::normed_spaces::{Exponent, NormSpec, SpaceDescriptor};

pub struct EquivalenceStudy;

const COLUMNS: &[&str] = &[
    "level",
    "q",
    "degree",
    "decay",
    "seed",
    "bmo_arc",
    "bmo_poisson",
    "carleson",
    "carleson_error",
    "ratio_arc",
    "ratio_poisson",
    "inverse_ratio_poisson",
];

struct Resolution {
    z0: PoissonGrid,
    sampling: DiscSampling,
    arcs: ArcGrid,
    bmo_z0: PoissonGrid,
}

fn resolution(config: &StudyConfig, degree: usize, level: usize) -> Resolution {
    let log_n = log2_ceil(degree);
    let mut sampling = DiscSampling::for_degree(degree as u64);
    if let Some(m) = config.grid.m {
        sampling.angular = m;
    }
    for _ in 0..level {
        sampling = sampling.refined();
    }
    Resolution {
        z0: PoissonGrid::new(config.grid.j.unwrap_or(log_n + 3) + level),
        sampling,
        arcs: ArcGrid::new(config.grid.depth.unwrap_or(log_n + 3) + level),
        bmo_z0: PoissonGrid::new(log_n + 1 + level),
    }
}

impl Study for EquivalenceStudy {
    fn name(&self) -> &'static str {
        "equivalence"
    }

    fn description(&self) -> &'static str {
        "carleson_poisson against bmo_arc and bmo_poisson_q on random corpora: log-trend in the degree and ratio bands"
    }

    fn defaults(&self) -> StudyConfig {
        StudyConfig {
            seed: Some(0),
            space: Some(SpaceDescriptor { p: Exponent(2.0), d: 1 }),
            corpus: Some(CorpusConfig {
                count: 50,
                degrees: vec![8, 16, 32, 64, 128],
                decays: vec![0.0, 0.5, 1.0],
            }),
            q: Some(vec![2.0]),
            refine: Some(1),
            ..StudyConfig::named(self.name())
        }
    }

    fn execute(&self, config: &StudyConfig) -> Result<StudyReport, StudyError> {
        let desc = config.space.expect("defaults set the space");
        let space = NormSpec::lp(desc.p.0, desc.d)?;
        let p = desc.p.0;
        let corpus: &CorpusConfig = config.corpus()?;
        let levels = config.refine() + 1;
        let mut report = StudyReport::new(config, COLUMNS);

        for &q in config.qs() {
            for level in 0..levels {
                let mut grids = Vec::new();
                for (di, &degree) in corpus.degrees.iter().enumerate() {
                    let res = resolution(config, degree, level);
                    grids.push(json!({
                        "degree": degree,
                        "z0": res.z0,
                        "sampling": res.sampling,
                        "arcs": res.arcs,
                        "bmo_z0": res.bmo_z0,
                    }));
                    for (gi, &decay) in corpus.decays.iter().enumerate() {
                        for i in 0..corpus.count {
                            let seed = item_seed(config.seed(), di * corpus.decays.len() + gi, i);
                            let f = random_polynomial(degree, decay, desc.d, seed, false);
                            let b_arc = bmo_arc(&space, &f, &res.arcs)?;
                            let b_poi = bmo_poisson_q(&space, &f, q, &res.bmo_z0)?;
                            let c = carleson_poisson_with(&space, &f, q, &res.z0, &res.sampling)?;
                            report.push(vec![
                                level.into(),
                                q.into(),
                                degree.into(),
                                decay.into(),
                                seed.into(),
                                b_arc.into(),
                                b_poi.into(),
                                c.value.into(),
                                c.error_estimate.into(),
                                (c.value / b_arc.powf(q)).into(),
                                (c.value / b_poi.powf(q)).into(),
                                (b_poi.powf(q) / c.value).into(),
                            ]);
                        }
                    }
                }
                report.env(&format!("grids.q{q}.level{level}"), grids);
            }
            summarize(&mut report, q, p, levels);
        }
        report.notes.push(
            "ratio_arc = carleson / bmo_arc^q; ratio_poisson = carleson / bmo_poisson^q (convexity direction); \
             inverse_ratio_poisson = bmo_poisson^q / carleson (smoothness direction)"
                .into(),
        );
        Ok(report)
    }
}

fn summarize(report: &mut StudyReport, q: f64, p: f64, levels: usize) {
    let at = |report: &StudyReport, col: &str, level: usize| -> (Vec<f64>, Vec<f64>) {
        let (il, iq, id, ic) = (
            report.column("level").unwrap(),
            report.column("q").unwrap(),
            report.column("degree").unwrap(),
            report.column(col).unwrap(),
        );
        report
            .rows
            .iter()
            .filter(|r| r[il] == Cell::Int(level as i64) && r[iq] == Cell::Num(q))
            .map(|r| (r[id].as_f64().unwrap(), r[ic].as_f64().unwrap()))
            .unzip()
    };
    let mut trend = Vec::new();
    let mut arc_band = Vec::new();
    let mut conv = (Vec::new(), Vec::new());
    let mut smooth = (Vec::new(), Vec::new());
    for level in 0..levels {
        let (deg, ratio) = at(report, "ratio_arc", level);
        let slope = log_log_slope(&deg, &ratio);
        report.summary.insert(format!("q{q}.level{level}.ratio_arc.slope"), slope);
        describe(&mut report.summary, &format!("q{q}.level{level}.ratio_arc"), &ratio);
        trend.push(slope.abs());
        arc_band.push(band(&ratio));
        let (_, rp) = at(report, "ratio_poisson", level);
        let (_, ri) = at(report, "inverse_ratio_poisson", level);
        describe(&mut report.summary, &format!("q{q}.level{level}.ratio_poisson"), &rp);
        describe(&mut report.summary, &format!("q{q}.level{level}.inverse_ratio_poisson"), &ri);
        conv.0.push(band(&rp));
        conv.1.push(max(&rp));
        smooth.0.push(band(&ri));
        smooth.1.push(max(&ri));
        let (_, err) = at(report, "carleson_error", level);
        report.env(&format!("q{q}.level{level}.max_carleson_error"), max(&err));
    }
    report.gate(
        &format!("arc.trend.q{q}"),
        "|OLS slope of ln(carleson / bmo_arc^q) against ln N|",
        Comparison::Lt,
        0.15,
        &trend,
    );
    report.gate(
        &format!("arc.band.q{q}"),
        "max / min of carleson / bmo_arc^q over the corpus",
        Comparison::Le,
        64.0,
        &arc_band,
    );
    // a q-uniformly convex target bounds carleson by bmo^q, a q-uniformly smooth one the reverse
    if q == p.max(2.0) {
        report.gate(&format!("convexity.band.q{q}"), "max / min of carleson / bmo_poisson^q", Comparison::Le, 64.0, &conv.0);
        report.gate(&format!("convexity.sup.q{q}"), "max of carleson / bmo_poisson^q", Comparison::Le, 64.0, &conv.1);
    }
    if q == p.min(2.0) {
        report.gate(&format!("smoothness.band.q{q}"), "max / min of bmo_poisson^q / carleson", Comparison::Le, 64.0, &smooth.0);
        report.gate(&format!("smoothness.sup.q{q}"), "max of bmo_poisson^q / carleson", Comparison::Le, 64.0, &smooth.1);
    }
}
