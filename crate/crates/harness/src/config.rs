//! Experiment configuration: TOML with one `[[experiment]]` table per run.

use serde::Deserialize;

use qds_core::curve::{CurvePiece, CurveSpec, PowerLaw};
use qds_core::{ArrayMode, ExpandingMapParams, LambdaAstar, Observable, TriangularArrayScheme};

use crate::error::{HarnessError, Result};

pub const DEFAULT_SEED: u64 = 1729;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub bounds: Option<BoundsConfig>,
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<ExperimentConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub lambda: f64,
    pub a_star: f64,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn bounds(&self) -> Result<LambdaAstar<f64>> {
        match self.bounds {
            None => Ok(LambdaAstar::default()),
            Some(b) => Ok(LambdaAstar::new(b.lambda, b.a_star)?),
        }
    }

    /// Every check that can be made without running an experiment.
    pub fn validate(&self) -> Result<()> {
        let bounds = self.bounds().map_err(|e| HarnessError::Config(format!("bounds: {e}")))?;
        let mut names = std::collections::BTreeSet::new();
        for e in &self.experiments {
            let name = e.name();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return config(format!("experiment name {name:?} must be non-empty [A-Za-z0-9_-]"));
            }
            if !names.insert(name.to_string()) {
                return config(format!("duplicate experiment name {name:?}"));
            }
            e.validate(&bounds).map_err(|err| {
                let msg = match err {
                    HarnessError::Config(m) => m,
                    HarnessError::Core(c) => c.to_string(),
                    other => other.to_string(),
                };
                HarnessError::Config(format!("{name}: {msg}"))
            })?;
        }
        Ok(())
    }

    pub fn seed_for(&self, e: &ExperimentConfig) -> u64 {
        e.seed().or(self.seed).unwrap_or(DEFAULT_SEED)
    }
}

fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(HarnessError::Config(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    Birkhoff,
    Expanding,
    Common,
    Generic,
    Moments,
    Corr,
    Identity,
    Ulam,
}

impl Kind {
    pub fn id(self) -> &'static str {
        match self {
            Kind::Birkhoff => "E-BIRKHOFF",
            Kind::Expanding => "E-EXPANDING",
            Kind::Common => "E-COMMON",
            Kind::Generic => "E-GENERIC",
            Kind::Moments => "E-MOMENTS",
            Kind::Corr => "E-CORR",
            Kind::Identity => "E-IDENTITY",
            Kind::Ulam => "E-ULAM",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "id")]
pub enum ExperimentConfig {
    #[serde(rename = "E-BIRKHOFF")]
    Birkhoff(ConvergenceConfig),
    #[serde(rename = "E-EXPANDING")]
    Expanding(ConvergenceConfig),
    #[serde(rename = "E-COMMON")]
    Common(ConvergenceConfig),
    #[serde(rename = "E-GENERIC")]
    Generic(GenericityConfig),
    #[serde(rename = "E-MOMENTS")]
    Moments(MomentsConfig),
    #[serde(rename = "E-CORR")]
    Corr(CorrConfig),
    #[serde(rename = "E-IDENTITY")]
    Identity(IdentityConfig),
    #[serde(rename = "E-ULAM")]
    Ulam(UlamConfig),
}

macro_rules! common_field {
    ($self:ident, $field:ident) => {
        match $self {
            ExperimentConfig::Birkhoff(c) | ExperimentConfig::Expanding(c) | ExperimentConfig::Common(c) => &c.$field,
            ExperimentConfig::Generic(c) => &c.$field,
            ExperimentConfig::Moments(c) => &c.$field,
            ExperimentConfig::Corr(c) => &c.$field,
            ExperimentConfig::Identity(c) => &c.$field,
            ExperimentConfig::Ulam(c) => &c.$field,
        }
    };
}

impl ExperimentConfig {
    pub fn kind(&self) -> Kind {
        match self {
            ExperimentConfig::Birkhoff(_) => Kind::Birkhoff,
            ExperimentConfig::Expanding(_) => Kind::Expanding,
            ExperimentConfig::Common(_) => Kind::Common,
            ExperimentConfig::Generic(_) => Kind::Generic,
            ExperimentConfig::Moments(_) => Kind::Moments,
            ExperimentConfig::Corr(_) => Kind::Corr,
            ExperimentConfig::Identity(_) => Kind::Identity,
            ExperimentConfig::Ulam(_) => Kind::Ulam,
        }
    }

    pub fn name(&self) -> &str {
        common_field!(self, name)
    }

    pub fn criterion(&self) -> Option<u8> {
        *common_field!(self, criterion)
    }

    pub fn seed(&self) -> Option<u64> {
        *common_field!(self, seed)
    }

    fn validate(&self, bounds: &LambdaAstar<f64>) -> Result<()> {
        match self {
            ExperimentConfig::Birkhoff(c) => {
                c.validate(bounds)?;
                let scheme = c.scheme.build()?;
                if !scheme.is_degenerate() {
                    return config("E-BIRKHOFF needs a constant curve in canonical mode");
                }
                Ok(())
            }
            ExperimentConfig::Expanding(c) => c.validate(bounds),
            ExperimentConfig::Common(c) => {
                c.validate(bounds)?;
                c.scheme.check_common_measure()
            }
            ExperimentConfig::Generic(c) => c.validate(bounds),
            ExperimentConfig::Moments(c) => c.validate(bounds),
            ExperimentConfig::Corr(c) => c.validate(bounds),
            ExperimentConfig::Identity(c) => c.validate(),
            ExperimentConfig::Ulam(c) => c.validate(),
        }
    }
}

/// Curve shorthands.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveConfig {
    Constant {
        degree: u32,
        #[serde(default)]
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Amplitude `offset + scale·t^exponent`.
    PowerLaw {
        degree: u32,
        #[serde(default)]
        offset: f64,
        scale: f64,
        #[serde(default = "one")]
        exponent: f64,
    },
    /// Linear maps `x ↦ m·x`, switching degree at `jumps`.
    PiecewiseLinear { degrees: Vec<u32>, jumps: Vec<f64> },
    Pieces { pieces: Vec<CurvePiece<f64>>, holder_exponent: f64 },
}

fn one() -> f64 {
    1.0
}

impl CurveConfig {
    pub fn build(&self) -> Result<CurveSpec<f64>> {
        Ok(match self {
            CurveConfig::Constant { degree, amplitude, phase } => {
                let c = CurveSpec::constant(ExpandingMapParams::new(*degree, *amplitude, *phase));
                c.validate()?;
                c
            }
            CurveConfig::PowerLaw { degree, offset, scale, exponent } => {
                CurveSpec::power_law(*degree, PowerLaw { offset: *offset, scale: *scale, exponent: *exponent })?
            }
            CurveConfig::PiecewiseLinear { degrees, jumps } => CurveSpec::piecewise_linear_maps(degrees, jumps)?,
            CurveConfig::Pieces { pieces, holder_exponent } => CurveSpec::new(pieces.clone(), *holder_exponent)?,
        })
    }
}

/// The array built from a curve, optionally with the perturbed construction.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub curve: CurveConfig,
    /// Amplitude wobble `scale·n^{−η}`; zero selects the canonical array.
    #[serde(default)]
    pub perturbation: f64,
}

impl SchemeConfig {
    pub fn build(&self) -> Result<TriangularArrayScheme<f64>> {
        let curve = self.curve.build()?;
        let mode = if self.perturbation == 0.0 { ArrayMode::Canonical } else { ArrayMode::Perturbed { scale: self.perturbation } };
        Ok(TriangularArrayScheme::new(curve, mode)?)
    }

    fn validate(&self, bounds: &LambdaAstar<f64>) -> Result<()> {
        self.build()?.validate(bounds)?;
        Ok(())
    }

    /// Every map must be linear so that Lebesgue measure is exactly invariant.
    fn check_common_measure(&self) -> Result<()> {
        let scheme = self.build()?;
        if !matches!(scheme.mode(), ArrayMode::Canonical) {
            return config("common-measure experiment needs the canonical array");
        }
        for (i, p) in scheme.curve().pieces.iter().enumerate() {
            if !(p.amplitude.is_constant() && p.amplitude.offset == 0.0) {
                return config(format!("piece {i} is not a linear map, so Lebesgue measure is not invariant"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UlamChoice {
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_subsamples")]
    pub subsamples: usize,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

impl Default for UlamChoice {
    fn default() -> Self {
        Self { bins: default_bins(), subsamples: default_subsamples(), nodes: default_nodes() }
    }
}

impl UlamChoice {
    pub fn settings(&self) -> qds_core::UlamSettings<f64> {
        qds_core::UlamSettings { bins: self.bins, subsamples: self.subsamples, tolerance: qds_core::ulam::DEFAULT_TOLERANCE }
    }

    fn validate(&self) -> Result<()> {
        if self.bins < 2 || self.subsamples < 4 || self.nodes < 2 {
            return config("ulam needs bins >= 2, subsamples >= 4, nodes >= 2");
        }
        Ok(())
    }
}

fn default_bins() -> usize {
    1024
}
fn default_subsamples() -> usize {
    64
}
fn default_nodes() -> usize {
    qds_core::srb::DEFAULT_NODES_PER_PIECE
}
fn default_ensemble() -> usize {
    200
}
fn default_t_grid() -> usize {
    512
}
fn default_observables() -> Vec<Observable<f64>> {
    vec![Observable::cos(1)]
}
fn default_cos() -> Observable<f64> {
    Observable::cos(1)
}
fn default_final_tolerance() -> f64 {
    0.05
}
fn default_sigmas() -> f64 {
    3.0
}

fn check_levels(n_values: &[usize]) -> Result<()> {
    if n_values.is_empty() || n_values.contains(&0) {
        return config("n_values must be a non-empty list of positive levels");
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return config("n_values must be strictly increasing");
    }
    Ok(())
}

/// Pushforward rate of the ensemble mean towards `μ̂_t(f)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateConfig {
    /// Attributes the rate check to a different criterion than its experiment.
    #[serde(default)]
    pub criterion: Option<u8>,
    #[serde(default = "default_cos")]
    pub observable: Observable<f64>,
    pub n_values: Vec<usize>,
    /// Required slope is `−fraction·η`.
    #[serde(default = "default_eta_fraction")]
    pub eta_fraction: f64,
    #[serde(default = "default_slope_tolerance")]
    pub slope_tolerance: f64,
    /// Number of sampled times `t = j/samples`.
    #[serde(default = "default_rate_samples")]
    pub t_samples: usize,
}

fn default_eta_fraction() -> f64 {
    0.8
}
fn default_slope_tolerance() -> f64 {
    0.15
}
fn default_rate_samples() -> usize {
    64
}

/// Exact-invariance check of `μ(f_{n,⌊nt⌋})` against the Lebesgue mean.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvarianceConfig {
    pub t_values: Vec<f64>,
    #[serde(default = "default_sigmas")]
    pub sigmas: f64,
    #[serde(default = "default_invariance_ensemble")]
    pub ensemble: usize,
}

fn default_invariance_ensemble() -> usize {
    2000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub name: String,
    #[serde(default)]
    pub criterion: Option<u8>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub scheme: SchemeConfig,
    #[serde(default = "default_observables")]
    pub observables: Vec<Observable<f64>>,
    pub n_values: Vec<usize>,
    #[serde(default = "default_ensemble")]
    pub ensemble: usize,
    #[serde(default = "default_t_grid")]
    pub t_grid: usize,
    #[serde(default)]
    pub ulam: UlamChoice,
    /// Deterministic starting points reported separately from the quantiles.
    #[serde(default)]
    pub probe_points: Vec<f64>,
    /// The median at the largest level must fall below this.
    #[serde(default = "default_final_tolerance")]
    pub final_tolerance: f64,
    /// Required `median(first n) / median(last n)`.
    #[serde(default)]
    pub min_ratio: Option<f64>,
    #[serde(default)]
    pub rate: Option<RateConfig>,
    #[serde(default)]
    pub invariance: Option<InvarianceConfig>,
    /// Adds a constant to the reference `ζ(t)` for `t > 0`.
    #[serde(default)]
    pub reference_shift: f64,
}

impl ConvergenceConfig {
    fn validate(&self, bounds: &LambdaAstar<f64>) -> Result<()> {
        self.scheme.validate(bounds)?;
        check_levels(&self.n_values)?;
        self.ulam.validate()?;
        if self.observables.is_empty() {
            return config("need at least one observable");
        }
        for f in &self.observables {
            if let Observable::Tabulated { values } = f {
                Observable::tabulated(values.clone())?;
            }
        }
        if self.ensemble == 0 || self.t_grid == 0 {
            return config("ensemble and t_grid must be positive");
        }
        if self.probe_points.iter().any(|x| !x.is_finite()) {
            return config("probe points must be finite");
        }
        if let Some(r) = &self.rate {
            check_levels(&r.n_values)?;
            if r.n_values.len() < 2 || r.t_samples == 0 {
                return config("rate check needs at least two levels and one sampled time");
            }
        }
        if let Some(inv) = &self.invariance {
            if inv.t_values.is_empty() || inv.t_values.iter().any(|t| !(0.0..=1.0).contains(t)) {
                return config("invariance t_values must lie in [0, 1]");
            }
            if inv.ensemble < 2 {
                return config("invariance ensemble must have at least 2 samples");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenericityConfig {
    pub name: String,
    #[serde(default)]
    pub criterion: Option<u8>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub scheme: SchemeConfig,
    #[serde(default = "Observable::dictionary")]
    pub dictionary: Vec<Observable<f64>>,
    pub n_values: Vec<usize>,
    #[serde(default = "default_ensemble")]
    pub ensemble: usize,
    #[serde(default = "default_t_grid")]
    pub t_grid: usize,
    #[serde(default)]
    pub ulam: UlamChoice,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_min_fraction")]
    pub min_fraction: f64,
}

fn default_epsilons() -> Vec<f64> {
    vec![0.01, 0.02, 0.05, 0.1]
}
fn default_epsilon() -> f64 {
    0.05
}
fn default_min_fraction() -> f64 {
    0.95
}

impl GenericityConfig {
    fn validate(&self, bounds: &LambdaAstar<f64>) -> Result<()> {
        self.scheme.validate(bounds)?;
        check_levels(&self.n_values)?;
        self.ulam.validate()?;
        if self.dictionary.len() < 5 {
            return config("genericity needs a dictionary of at least 5 observables");
        }
        if self.ensemble == 0 || self.t_grid == 0 || self.epsilons.iter().any(|e| e.is_nan() || *e <= 0.0) || self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return config("ensemble, t_grid and epsilons must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsConfig {
    pub name: String,
    #[serde(default)]
    pub criterion: Option<u8>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub scheme: SchemeConfig,
    #[serde(default = "default_cos")]
    pub observable: Observable<f64>,
    pub n_values: Vec<usize>,
    #[serde(default = "default_t_values")]
    pub t_values: Vec<f64>,
    #[serde(default = "default_moment_ensemble")]
    pub ensemble: usize,
    #[serde(default = "default_phi_levels")]
    pub phi_check_n: Vec<usize>,
}

fn default_t_values() -> Vec<f64> {
    vec![0.5, 1.0]
}
fn default_moment_ensemble() -> usize {
    4000
}
fn default_phi_levels() -> Vec<usize> {
    vec![100, 10_000, 1_000_000]
}

impl MomentsConfig {
    fn validate(&self, bounds: &LambdaAstar<f64>) -> Result<()> {
        self.scheme.validate(bounds)?;
        check_levels(&self.n_values)?;
        if self.t_values.is_empty() || self.t_values.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return config("t_values must lie in [0, 1]");
        }
        if self.ensemble < 4 {
            return config("split-sample centering needs an ensemble of at least 4");
        }
        if self.phi_check_n.iter().any(|n| *n < 2) {
            return config("phi_check_n entries must be at least 2");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrConfig {
    pub name: String,
    #[serde(default)]
    pub criterion: Option<u8>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub scheme: SchemeConfig,
    #[serde(default = "default_cos")]
    pub observable: Observable<f64>,
    pub n: usize,
    pub k1: usize,
    #[serde(default = "default_max_gap")]
    pub max_gap: usize,
    #[serde(default = "default_corr_ensemble")]
    pub ensemble: usize,
    #[serde(default = "default_cutoff")]
    pub spectral_cutoff: usize,
}

fn default_max_gap() -> usize {
    15
}
fn default_corr_ensemble() -> usize {
    200_000
}
fn default_cutoff() -> usize {
    qds_core::spectral::DEFAULT_CUTOFF
}

impl CorrConfig {
    fn validate(&self, bounds: &LambdaAstar<f64>) -> Result<()> {
        self.scheme.validate(bounds)?;
        if self.max_gap == 0 || self.k1 + self.max_gap > self.n {
            return config("need max_gap >= 1 and k1 + max_gap <= n");
        }
        if self.ensemble < qds_core::statistics::MIN_SAMPLES {
            return config(format!("correlation ensemble must be at least {}", qds_core::statistics::MIN_SAMPLES));
        }
        if self.spectral_cutoff == 0 {
            return config("spectral_cutoff must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityConfig {
    pub name: String,
    #[serde(default)]
    pub criterion: Option<u8>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_spaces")]
    pub spaces: usize,
    #[serde(default = "default_max_atoms")]
    pub max_atoms: usize,
    #[serde(default = "default_identity_tolerance")]
    pub tolerance: f64,
}

fn default_spaces() -> usize {
    1000
}
fn default_max_atoms() -> usize {
    32
}
fn default_identity_tolerance() -> f64 {
    1e-12
}

impl IdentityConfig {
    fn validate(&self) -> Result<()> {
        if self.max_atoms < 2 {
            return config("max_atoms must be at least 2");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UlamConfig {
    pub name: String,
    #[serde(default)]
    pub criterion: Option<u8>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_linear_degrees")]
    pub linear_degrees: Vec<u32>,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_coarse_bins")]
    pub coarse_bins: usize,
    #[serde(default = "default_subsamples")]
    pub subsamples: usize,
    #[serde(default = "default_residual")]
    pub residual_tolerance: f64,
    #[serde(default = "default_nonlinear")]
    pub nonlinear: ExpandingMapParams<f64>,
    #[serde(default = "default_cos")]
    pub observable: Observable<f64>,
    #[serde(default = "default_refinement")]
    pub refinement_tolerance: f64,
    #[serde(default = "default_orbit_length")]
    pub orbit_length: usize,
    #[serde(default = "default_batches")]
    pub batches: usize,
    #[serde(default = "default_sigmas")]
    pub sigmas: f64,
}

fn default_linear_degrees() -> Vec<u32> {
    vec![2, 3]
}
fn default_coarse_bins() -> usize {
    512
}
fn default_residual() -> f64 {
    1e-12
}
fn default_nonlinear() -> ExpandingMapParams<f64> {
    ExpandingMapParams::new(2, 0.5, 0.0)
}
fn default_refinement() -> f64 {
    1e-3
}
fn default_orbit_length() -> usize {
    10_000_000
}
fn default_batches() -> usize {
    100
}

impl UlamConfig {
    fn validate(&self) -> Result<()> {
        if self.bins < 2 || self.coarse_bins < 2 || self.subsamples < 4 {
            return config("ulam needs bins >= 2 and subsamples >= 4");
        }
        if self.linear_degrees.iter().any(|m| *m < 2) {
            return config("linear degrees must be at least 2");
        }
        if self.batches < 2 || self.orbit_length < self.batches {
            return config("orbit must contain at least two batches");
        }
        self.nonlinear.check_admissible(&LambdaAstar::default())?;
        Ok(())
    }
}
