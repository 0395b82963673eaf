//! Exponential decay fits `|c(g)| ≈ D ϑ^g`.

use serde::Serialize;

use super::EnsembleEstimate;

/// Fewer significant gaps than this make a fit inconclusive.
pub const MIN_SIGNIFICANT: usize = 4;
/// Root-mean-square residual in `log|c|` above which a fit is flagged.
pub const LARGE_RESIDUAL_RMS: f64 = 0.1;
const SIGNIFICANCE_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub d: f64,
    pub theta: f64,
    pub gaps: Vec<f64>,
    pub log_abs: Vec<f64>,
    pub residual_rms: f64,
    pub large_residual: bool,
}

impl DecayFit {
    pub fn decays(&self) -> bool {
        self.theta < 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DecayOutcome {
    Fit(DecayFit),
    Inconclusive { significant: usize },
}

/// Least squares of `log|c|` on `g` over estimates exceeding three standard errors.
pub fn decay_fit(estimates: &[(usize, EnsembleEstimate)]) -> DecayOutcome {
    let (gaps, log_abs): (Vec<f64>, Vec<f64>) = estimates
        .iter()
        .filter(|(_, e)| e.mean.is_finite() && e.mean.abs() > SIGNIFICANCE_SIGMAS * e.std_error && e.mean != 0.0)
        .map(|(g, e)| (*g as f64, e.mean.abs().ln()))
        .unzip();
    if gaps.len() < MIN_SIGNIFICANT {
        return DecayOutcome::Inconclusive { significant: gaps.len() };
    }
    let m = gaps.len() as f64;
    let gx = gaps.iter().sum::<f64>() / m;
    let ly = log_abs.iter().sum::<f64>() / m;
    let sxx: f64 = gaps.iter().map(|g| (g - gx).powi(2)).sum();
    if sxx == 0.0 {
        return DecayOutcome::Inconclusive { significant: gaps.len() };
    }
    let sxy: f64 = gaps.iter().zip(&log_abs).map(|(g, l)| (g - gx) * (l - ly)).sum();
    let slope = sxy / sxx;
    let intercept = ly - slope * gx;
    let residual_rms =
        (gaps.iter().zip(&log_abs).map(|(g, l)| (l - intercept - slope * g).powi(2)).sum::<f64>() / m).sqrt();
    DecayOutcome::Fit(DecayFit {
        d: intercept.exp(),
        theta: slope.exp(),
        gaps,
        log_abs,
        residual_rms,
        large_residual: residual_rms > LARGE_RESIDUAL_RMS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statistics::phi;

    fn exact(values: impl Iterator<Item = (usize, f64)>) -> Vec<(usize, EnsembleEstimate)> {
        values.map(|(g, v)| (g, EnsembleEstimate { mean: v, std_error: 0.0, samples: 1, seed: 0 })).collect()
    }

    #[test]
    fn geometric_sequence() {
        let DecayOutcome::Fit(fit) = decay_fit(&exact((1..=20).map(|g| (g, 0.8_f64.powi(g as i32))))) else {
            panic!("expected a fit")
        };
        assert!((fit.theta - 0.8).abs() < 1e-6);
        assert!((fit.d - 1.0).abs() < 1e-6);
        assert!(!fit.large_residual);
        assert!(fit.decays());
    }

    #[test]
    fn signs_are_ignored() {
        let DecayOutcome::Fit(fit) = decay_fit(&exact((1..=10).map(|g| (g, 2.0 * (-0.5_f64).powi(g as i32))))) else {
            panic!("expected a fit")
        };
        assert!((fit.theta - 0.5).abs() < 1e-9);
        assert!((fit.d - 2.0).abs() < 1e-9);
    }

    #[test]
    fn polylogarithmic_decay_is_flagged() {
        let DecayOutcome::Fit(fit) = decay_fit(&exact((1..=20).map(|g| (g, phi(g as f64).unwrap())))) else {
            panic!("expected a fit")
        };
        assert!(fit.theta < 1.0);
        assert!(fit.large_residual, "rms {}", fit.residual_rms);
    }

    #[test]
    fn zeros_and_noise_are_inconclusive() {
        assert_eq!(decay_fit(&exact((1..=20).map(|g| (g, 0.0)))), DecayOutcome::Inconclusive { significant: 0 });
        let noisy: Vec<_> = (1..=20)
            .map(|g| (g, EnsembleEstimate { mean: if g < 4 { 0.5 } else { 0.01 }, std_error: 0.01, samples: 100, seed: 0 }))
            .collect();
        assert_eq!(decay_fit(&noisy), DecayOutcome::Inconclusive { significant: 3 });
    }
}
