use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::StudyError;
use crate::normed_spaces::{Exponent, SpaceDescriptor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    /// Polynomials per (degree, decay) cell; item `i` of cell `c` uses seed `seed + 10000 c + i`.
    pub count: usize,
    pub degrees: Vec<usize>,
    pub decays: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Poisson `z0` ring levels, or radial levels where no `z0` grid exists.
    pub j: Option<usize>,
    /// Angular samples per ring.
    pub m: Option<usize>,
    /// Dyadic arc depth.
    pub depth: Option<usize>,
    pub aperture: Option<f64>,
}

impl GridConfig {
    fn over(self, d: GridConfig) -> GridConfig {
        GridConfig {
            j: self.j.or(d.j),
            m: self.m.or(d.m),
            depth: self.depth.or(d.depth),
            aperture: self.aperture.or(d.aperture),
        }
    }
}

/// Study parameters. Unset fields take the study's defaults; after
/// [`StudyConfig::over`] every field a study reads is populated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub study: String,
    pub seed: Option<u64>,
    pub space: Option<SpaceDescriptor>,
    pub dims: Option<Vec<usize>>,
    pub corpus: Option<CorpusConfig>,
    pub q: Option<Vec<f64>>,
    pub p: Option<Vec<Exponent>>,
    pub grid: GridConfig,
    /// Number of refinement levels beyond the base resolution.
    pub refine: Option<usize>,
    /// Threshold overrides by gate name.
    pub gates: BTreeMap<String, f64>,
    pub out: Option<PathBuf>,
}

impl StudyConfig {
    pub fn named(study: &str) -> Self {
        StudyConfig {
            study: study.to_string(),
            ..Default::default()
        }
    }

    /// Fields set in `self` win; the rest come from `defaults`.
    pub fn over(self, defaults: StudyConfig) -> StudyConfig {
        let mut gates = defaults.gates;
        gates.extend(self.gates);
        StudyConfig {
            study: if self.study.is_empty() { defaults.study } else { self.study },
            seed: self.seed.or(defaults.seed),
            space: self.space.or(defaults.space),
            dims: self.dims.or(defaults.dims),
            corpus: self.corpus.or(defaults.corpus),
            q: self.q.or(defaults.q),
            p: self.p.or(defaults.p),
            grid: self.grid.over(defaults.grid),
            refine: self.refine.or(defaults.refine),
            gates,
            out: self.out.or(defaults.out),
        }
    }

    pub fn validate(&self) -> Result<(), StudyError> {
        let bad = |msg: String| Err(StudyError::InvalidConfig(msg));
        if let Some(c) = &self.corpus {
            if c.count == 0 {
                return bad("corpus count must be >= 1 (seed list is empty)".into());
            }
            if c.degrees.is_empty() || c.degrees.contains(&0) {
                return bad("corpus degrees must be a nonempty list of positive integers".into());
            }
            if c.decays.is_empty() || c.decays.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
                return bad("corpus decays must be a nonempty list of finite values >= 0".into());
            }
        }
        if let Some(d) = &self.dims {
            if d.is_empty() || d.contains(&0) {
                return bad("dims must be a nonempty list of positive integers".into());
            }
        }
        if let Some(s) = &self.space {
            if s.d == 0 || !(s.p.0 >= 1.0) {
                return bad(format!("bad space p = {}, d = {}", s.p, s.d));
            }
        }
        if let Some(q) = &self.q {
            if q.is_empty() || q.iter().any(|q| !(*q > 1.0 && q.is_finite())) {
                return bad("q must be a nonempty list of finite values > 1".into());
            }
        }
        if let Some(p) = &self.p {
            if p.is_empty() || p.iter().any(|p| !(p.0 >= 1.0)) {
                return bad("p must be a nonempty list of values >= 1".into());
            }
        }
        if self.grid.m == Some(0) || self.grid.depth == Some(0) {
            return bad("grid resolutions must be positive".into());
        }
        if let Some(a) = self.grid.aperture {
            if !(a > 1.0 && a.is_finite()) {
                return bad(format!("aperture {a} must exceed 1"));
            }
        }
        if self.refine == Some(0) {
            return bad("refine must be >= 1 (reports carry at least two resolutions)".into());
        }
        Ok(())
    }

    pub(crate) fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub(crate) fn refine(&self) -> usize {
        self.refine.unwrap_or(1)
    }

    pub(crate) fn corpus(&self) -> Result<&CorpusConfig, StudyError> {
        self.corpus
            .as_ref()
            .ok_or_else(|| StudyError::InvalidConfig("corpus is required".into()))
    }

    pub(crate) fn qs(&self) -> &[f64] {
        self.q.as_deref().unwrap_or(&[2.0])
    }

    pub(crate) fn ps(&self) -> Vec<f64> {
        self.p.as_deref().unwrap_or(&[Exponent(2.0)]).iter().map(|p| p.0).collect()
    }

    pub(crate) fn dims(&self) -> &[usize] {
        self.dims.as_deref().unwrap_or(&[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_win() {
        let defaults = StudyConfig {
            seed: Some(1),
            q: Some(vec![2.0]),
            grid: GridConfig {
                j: Some(3),
                m: Some(64),
                ..Default::default()
            },
            gates: [("a".to_string(), 1.0), ("b".to_string(), 2.0)].into(),
            ..StudyConfig::named("x")
        };
        let user = StudyConfig {
            q: Some(vec![3.0]),
            grid: GridConfig {
                m: Some(128),
                ..Default::default()
            },
            gates: [("b".to_string(), 5.0)].into(),
            ..Default::default()
        };
        let c = user.over(defaults);
        assert_eq!(c.study, "x");
        assert_eq!(c.seed, Some(1));
        assert_eq!(c.q, Some(vec![3.0]));
        assert_eq!((c.grid.j, c.grid.m), (Some(3), Some(128)));
        assert_eq!(c.gates["a"], 1.0);
        assert_eq!(c.gates["b"], 5.0);
    }

    #[test]
    fn json_round_trip() {
        let c = StudyConfig {
            seed: Some(9),
            space: Some(SpaceDescriptor {
                p: Exponent(f64::INFINITY),
                d: 4,
            }),
            corpus: Some(CorpusConfig {
                count: 3,
                degrees: vec![8, 16],
                decays: vec![0.0, 0.5],
            }),
            p: Some(vec![Exponent(1.5), Exponent(f64::INFINITY)]),
            refine: Some(2),
            ..StudyConfig::named("equivalence")
        };
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"inf\""));
        let back: StudyConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }

    #[test]
    fn validation() {
        let ok = StudyConfig::named("x");
        ok.validate().unwrap();
        let mut c = ok.clone();
        c.corpus = Some(CorpusConfig {
            count: 0,
            degrees: vec![8],
            decays: vec![0.0],
        });
        assert!(c.validate().is_err());
        let mut c = ok.clone();
        c.q = Some(vec![1.0]);
        assert!(c.validate().is_err());
        let mut c = ok.clone();
        c.refine = Some(0);
        assert!(c.validate().is_err());
        let mut c = ok;
        c.grid.m = Some(0);
        assert!(c.validate().is_err());
        assert!(serde_json::from_str::<StudyConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
