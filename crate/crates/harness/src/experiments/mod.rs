//! One runner per experiment kind. Runners return checks and tables; the CLI writes files.

mod convergence;
mod correlations;
mod genericity;
mod identity;
mod moments;
mod ulam;

use serde::Serialize;

pub use convergence::{reference_curves, run_convergence, ConvergenceReport, ConvergenceRow, Reference};
pub(crate) use convergence::srb_table;
pub use correlations::run_correlations;
pub use genericity::run_genericity;
pub use identity::run_identity;
pub use moments::run_moments;
pub use ulam::run_ulam;

use crate::config::{ExperimentConfig, Kind};
use crate::error::Result;
use crate::output::Table;

/// One pass/fail verdict, attributed to an acceptance criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<u8>,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), criterion: None, pass, detail: detail.into() }
    }

    pub fn for_criterion(mut self, criterion: Option<u8>) -> Self {
        self.criterion = criterion;
        self
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: String,
    pub kind: Kind,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    /// Wall-clock time; reported on stdout, never written to outputs.
    pub elapsed: std::time::Duration,
}

impl Outcome {
    pub fn new(name: &str, kind: Kind, seed: u64) -> Self {
        Self { name: name.to_string(), kind, seed, checks: Vec::new(), tables: Vec::new(), elapsed: Default::default() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn check(&mut self, criterion: Option<u8>, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, pass, detail).for_criterion(criterion));
    }

    fn stem(&self, suffix: &str) -> String {
        format!("{}_{suffix}", self.name)
    }
}

pub fn run(e: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    let criterion = e.criterion();
    let mut out = match e {
        ExperimentConfig::Birkhoff(c) | ExperimentConfig::Expanding(c) | ExperimentConfig::Common(c) => {
            run_convergence(c, e.kind(), seed)?.1
        }
        ExperimentConfig::Generic(c) => run_genericity(c, seed)?,
        ExperimentConfig::Moments(c) => run_moments(c, seed)?,
        ExperimentConfig::Corr(c) => run_correlations(c, seed)?,
        ExperimentConfig::Identity(c) => run_identity(c, seed)?,
        ExperimentConfig::Ulam(c) => run_ulam(c, seed)?,
    };
    for c in &mut out.checks {
        c.criterion = c.criterion.or(criterion);
    }
    Ok(out)
}

/// Type-7 quantile of sorted data.
pub(crate) fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub(crate) fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

pub(crate) fn fmt(v: f64) -> String {
    crate::output::format_float(v)
}
