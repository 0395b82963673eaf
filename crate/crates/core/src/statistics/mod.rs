//! Ensemble estimators built on [`crate::sampling`].

mod correlation;
mod decay;
mod identity;
mod moments;
mod phi;

pub use correlation::{
    centered_four_point, correlation_decay, correlation_estimate, ensemble_means, CorrelationSpec, MIN_SAMPLES,
};
pub use decay::{decay_fit, DecayFit, DecayOutcome, LARGE_RESIDUAL_RMS, MIN_SIGNIFICANT};
pub use identity::{four_point_direct, four_point_expansion, four_point_expansion_check, random_probability_space};
pub use moments::{fourth_moment_series, no_systematic_growth, MomentRow};
pub use phi::{
    geometric_mean, moment_bound_integral, phi, phi_half_integral, phi_half_integral_bound_check, phi_integral, psi,
    PhiHalfCheck,
};

use serde::Serialize;

/// A Monte Carlo (or exact) expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(samples)`; zero for exact spaces.
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

impl EnsembleEstimate {
    /// Equal-weight estimate from i.i.d. samples.
    pub fn from_samples(values: &[f64], seed: u64) -> Self {
        let m = values.len();
        if m == 0 {
            return Self { mean: f64::NAN, std_error: f64::NAN, samples: 0, seed };
        }
        let mean = values.iter().sum::<f64>() / m as f64;
        let std_error = if m > 1 {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64;
            (var / m as f64).sqrt()
        } else {
            f64::INFINITY
        };
        Self { mean, std_error, samples: m, seed }
    }

    /// Exact expectation on a finite probability space.
    pub fn exact(values: &[f64], weights: &[f64], seed: u64) -> Self {
        let mean = values.iter().zip(weights).map(|(v, w)| v * w).sum();
        Self { mean, std_error: 0.0, samples: values.len(), seed }
    }

    /// `|mean − target| ≤ sigmas · std_error`, with a rounding floor for exact estimates.
    pub fn consistent_with(&self, target: f64, sigmas: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.std_error + 1e-12
    }
}

/// Mean with per-member weights: exact spaces use their weights, Monte Carlo ensembles use `from_samples`.
pub(crate) fn estimate(values: &[f64], weights: &[f64], exact: bool, seed: u64) -> EnsembleEstimate {
    if exact {
        EnsembleEstimate::exact(values, weights, seed)
    } else {
        EnsembleEstimate::from_samples(values, seed)
    }
}
