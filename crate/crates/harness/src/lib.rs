//! Experiment runner behind the `qds` command line tool.
//!
//! Library code returns tables and verdicts; only [`write_outputs`] touches the filesystem.

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod output;

use std::path::Path;

use config::{Config, ExperimentConfig, Kind};
use error::{HarnessError, Result};
use experiments::{reference_curves, Outcome, Reference};
use manifest::{Manifest, OutputEntry};
use output::Format;

/// The configuration used when `--config` is not given.
pub const ACCEPTANCE_CONFIG: &str = include_str!("../configs/acceptance.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Srb,
    Verify,
    Correlations,
    Moments,
    IdentityCheck,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Srb => "srb",
            Command::Verify => "verify",
            Command::Correlations => "correlations",
            Command::Moments => "moments",
            Command::IdentityCheck => "identity-check",
            Command::All => "all",
        }
    }

    pub fn selects(self, kind: Kind) -> bool {
        match self {
            Command::Simulate => matches!(kind, Kind::Birkhoff | Kind::Expanding | Kind::Common | Kind::Generic),
            Command::Srb => matches!(kind, Kind::Ulam | Kind::Birkhoff | Kind::Expanding | Kind::Common | Kind::Generic),
            Command::Correlations => kind == Kind::Corr,
            Command::Moments => kind == Kind::Moments,
            Command::IdentityCheck => kind == Kind::Identity,
            Command::Verify | Command::All => true,
        }
    }

    pub fn writes_files(self) -> bool {
        self != Command::Verify
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub format: Format,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Run {
    pub outcomes: Vec<Outcome>,
    pub manifest: Manifest,
    /// Rendered outputs in write order.
    pub files: Vec<(String, Vec<u8>)>,
}

impl Run {
    pub fn passed(&self) -> bool {
        self.manifest.pass
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

/// Reads and validates a config file, or the embedded acceptance config.
pub fn load_config(path: Option<&Path>) -> Result<(Config, String)> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", p.display())))?,
        None => ACCEPTANCE_CONFIG.to_string(),
    };
    let cfg = Config::parse(&text)?;
    Ok((cfg, text))
}

/// Reference curves only, for the `srb` command.
fn srb_outcome(e: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    let (scheme, observables, ulam, reference) = match e {
        ExperimentConfig::Birkhoff(c) | ExperimentConfig::Expanding(c) => (&c.scheme, &c.observables, &c.ulam, Reference::Srb),
        ExperimentConfig::Common(c) => (&c.scheme, &c.observables, &c.ulam, Reference::Lebesgue),
        ExperimentConfig::Generic(c) => (&c.scheme, &c.dictionary, &c.ulam, Reference::Srb),
        _ => return experiments::run(e, seed),
    };
    let mut out = Outcome::new(e.name(), e.kind(), seed);
    for (f, z) in observables.iter().zip(reference_curves(scheme, observables, ulam, reference)?) {
        out.tables.push(experiments::srb_table(format!("{}_srb_{}", e.name(), f.label()), &z));
    }
    Ok(out)
}

/// Runs the experiments selected by `command` and renders every table.
pub fn execute(cfg: &Config, config_text: &str, command: Command, opts: &RunOptions) -> Result<Run> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    pool.install(|| execute_inner(cfg, config_text, command, opts))
}

fn execute_inner(cfg: &Config, config_text: &str, command: Command, opts: &RunOptions) -> Result<Run> {
    let mut outcomes = Vec::new();
    for e in cfg.experiments.iter().filter(|e| command.selects(e.kind())) {
        let seed = opts.seed.unwrap_or_else(|| cfg.seed_for(e));
        let start = std::time::Instant::now();
        let mut outcome = if command == Command::Srb { srb_outcome(e, seed)? } else { experiments::run(e, seed)? };
        outcome.elapsed = start.elapsed();
        outcomes.push(outcome);
    }
    let mut files = Vec::new();
    let mut outputs = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for o in &outcomes {
        for t in &o.tables {
            let name = t.file_name(opts.format);
            if !seen.insert(name.clone()) {
                return Err(HarnessError::Output(format!("two tables would both be written to {name}")));
            }
            let bytes = t.render(opts.format)?;
            outputs.push(OutputEntry::new(name.clone(), &bytes));
            files.push((name, bytes));
        }
    }
    let criteria = manifest::criteria(&outcomes);
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        core_version: qds_core::VERSION.to_string(),
        command: command.name().to_string(),
        config_hash: manifest::sha256_hex(config_text.as_bytes()),
        seed: opts.seed.or(cfg.seed).unwrap_or(config::DEFAULT_SEED),
        format: opts.format.extension().to_string(),
        pass: criteria.iter().all(|c| c.pass),
        criteria,
        experiments: manifest::experiments(&outcomes),
        outputs,
    };
    Ok(Run { outcomes, manifest, files })
}

/// Writes every table and `manifest.json` into `dir`.
pub fn write_outputs(run: &Run, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    for (name, bytes) in &run.files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| HarnessError::io(&path, e))?;
    }
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_vec_pretty(&run.manifest).map_err(|e| HarnessError::Output(e.to_string()))?;
    text.push(b'\n');
    std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))
}

/// Human-readable per-check and per-criterion report.
pub fn report(run: &Run) -> String {
    let mut s = String::new();
    for o in &run.outcomes {
        s.push_str(&format!("{} ({}, seed {}, {:.2} s)\n", o.name, o.kind.id(), o.seed, o.elapsed.as_secs_f64()));
        for c in &o.checks {
            s.push_str(&format!("  [{}] {}: {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail));
        }
    }
    for c in &run.manifest.criteria {
        let label = c.criterion.map_or("unassigned".to_string(), |n| format!("criterion {n}"));
        s.push_str(&format!("{label}: {}\n", if c.pass { "PASS" } else { "FAIL" }));
    }
    s
}
