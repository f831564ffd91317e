//! Studies that compose the numerical modules into checkable claims.
//!
//! Each study implements [`Study`] and is looked up by name in a
//! [`StudyRegistry`]. A run takes a [`StudyConfig`] (merged over the study's
//! defaults) and produces a [`StudyReport`]: rows, a summary computed from the
//! rows, and pass/fail gates evaluated at every grid resolution.

mod config;
mod cotype;
mod equivalence;
mod kernels;
mod lacunary;
mod mobius;
mod moduli;
mod report;
pub mod stats;
mod witness;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::disc_harmonics::DiscError;
use crate::functionals::FunctionalError;
use crate::halfplane_kernels::KernelError;
use crate::normed_spaces::NormError;
use crate::quadrature::QuadratureError;

pub use config::{CorpusConfig, GridConfig, StudyConfig};
pub use cotype::CotypeStudy;
pub use equivalence::EquivalenceStudy;
pub use kernels::KernelStudy;
pub use lacunary::LacunaryStudy;
pub use mobius::MobiusStudy;
pub use moduli::ModuliStudy;
pub use report::{to_json_17, Cell, Comparison, Gate, StudyReport};
pub use witness::WitnessStudy;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("unknown study {0:?}")]
    UnknownStudy(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Disc(#[from] DiscError),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub trait Study {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    /// Fully populated configuration used for every field the caller leaves unset.
    fn defaults(&self) -> StudyConfig;

    /// Runs on an already merged and validated configuration.
    fn execute(&self, config: &StudyConfig) -> Result<StudyReport, StudyError>;

    fn run(&self, config: &StudyConfig) -> Result<StudyReport, StudyError> {
        let mut merged = config.clone().over(self.defaults());
        merged.study = self.name().to_string();
        merged.validate()?;
        self.execute(&merged)
    }
}

pub struct StudyRegistry {
    studies: BTreeMap<&'static str, Box<dyn Study>>,
}

impl StudyRegistry {
    pub fn empty() -> Self {
        StudyRegistry {
            studies: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(EquivalenceStudy));
        r.register(Box::new(LacunaryStudy));
        r.register(Box::new(WitnessStudy));
        r.register(Box::new(MobiusStudy));
        r.register(Box::new(ModuliStudy));
        r.register(Box::new(KernelStudy));
        r.register(Box::new(CotypeStudy));
        r
    }

    pub fn register(&mut self, study: Box<dyn Study>) {
        self.studies.insert(study.name(), study);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Study, StudyError> {
        self.studies
            .get(name)
            .map(|s| s.as_ref())
            .ok_or_else(|| StudyError::UnknownStudy(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.studies.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Study> {
        self.studies.values().map(|s| s.as_ref())
    }

    pub fn run(&self, name: &str, config: &StudyConfig) -> Result<StudyReport, StudyError> {
        self.get(name)?.run(config)
    }
}

impl Default for StudyRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Seed of item `index` in corpus cell `cell`.
pub(crate) fn item_seed(base: u64, cell: usize, index: usize) -> u64 {
    base.wrapping_add((cell as u64) * 10_000 + index as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_all_studies() {
        let r = StudyRegistry::builtin();
        let names: Vec<_> = r.names().collect();
        assert_eq!(
            names,
            vec!["cotype", "equivalence", "kernels", "lacunary", "mobius", "moduli", "witness"]
        );
        assert!(matches!(r.get("nope"), Err(StudyError::UnknownStudy(_))));
        for s in r.iter() {
            let d = s.defaults();
            d.validate().unwrap();
            assert!(!s.description().is_empty());
        }
    }

    #[test]
    fn seeds_are_distinct_per_cell() {
        assert_ne!(item_seed(0, 0, 1), item_seed(0, 1, 1));
        assert_eq!(item_seed(5, 2, 3), 20_008);
    }
}
