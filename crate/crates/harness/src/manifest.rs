//! Run manifest: provenance, verdicts and content hashes of every output.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::experiments::Outcome;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub tool_version: String,
    pub core_version: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub format: String,
    pub pass: bool,
    pub criteria: Vec<CriterionStatus>,
    pub experiments: Vec<ExperimentStatus>,
    pub outputs: Vec<OutputEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionStatus {
    /// `None` collects checks not attributed to any criterion.
    pub criterion: Option<u8>,
    pub pass: bool,
    pub checks: Vec<CheckEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub experiment: String,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentStatus {
    pub name: String,
    pub id: String,
    pub seed: u64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

impl OutputEntry {
    pub fn new(file: String, content: &[u8]) -> Self {
        Self { file, sha256: sha256_hex(content), bytes: content.len() }
    }
}

pub fn criteria(outcomes: &[Outcome]) -> Vec<CriterionStatus> {
    let mut by: BTreeMap<Option<u8>, Vec<CheckEntry>> = BTreeMap::new();
    for o in outcomes {
        for c in &o.checks {
            by.entry(c.criterion).or_default().push(CheckEntry {
                experiment: o.name.clone(),
                name: c.name.clone(),
                pass: c.pass,
                detail: c.detail.clone(),
            });
        }
    }
    by.into_iter()
        .map(|(criterion, checks)| CriterionStatus { criterion, pass: checks.iter().all(|c| c.pass), checks })
        .collect()
}

pub fn experiments(outcomes: &[Outcome]) -> Vec<ExperimentStatus> {
    outcomes
        .iter()
        .map(|o| ExperimentStatus { name: o.name.clone(), id: o.kind.id().to_string(), seed: o.seed, pass: o.passed() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Kind;
    use crate::experiments::Check;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn criteria_group_and_sort() {
        let mut a = Outcome::new("a", Kind::Identity, 1);
        a.checks.push(Check::new("x", true, "").for_criterion(Some(2)));
        a.checks.push(Check::new("y", false, "").for_criterion(Some(1)));
        let mut b = Outcome::new("b", Kind::Ulam, 1);
        b.checks.push(Check::new("z", true, "").for_criterion(Some(2)));
        let c = criteria(&[a, b]);
        assert_eq!(c.iter().map(|s| s.criterion).collect::<Vec<_>>(), vec![Some(1), Some(2)]);
        assert!(!c[0].pass);
        assert!(c[1].pass && c[1].checks.len() == 2);
    }
}
