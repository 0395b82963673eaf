//! Fourth moments of the centered ergodic functional.

use serde::Serialize;

use super::EnsembleEstimate;
use crate::error::{usage, Result};
use crate::observable::Observable;
use crate::sampling::Ensemble;
use crate::scheme::TriangularArrayScheme;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRow {
    pub n: usize,
    pub m4: f64,
    pub std_error: f64,
    pub samples: usize,
    /// `n (log n)² m4`.
    pub n_log2_scaled: f64,
    pub scaled_std_error: f64,
    pub seed: u64,
}

/// `ζ_n(x, t)` for every member.
fn zeta_values(f: &Observable<f64>, scheme: &TriangularArrayScheme<f64>, n: usize, t: f64, ensemble: &Ensemble) -> Vec<f64> {
    let nt = n as f64 * t;
    let whole = (nt.floor() as usize).min(n);
    let frac = nt - whole as f64;
    ensemble.map(|m| {
        let mut sum = 0.0;
        m.walk(scheme, n, whole, |k, x| {
            if k < whole {
                sum += f.eval_raw(x);
            } else if frac > 0.0 {
                sum += frac * f.eval_raw(x);
            }
        });
        sum / n as f64
    })
}

/// `μ(|ζ_n(·,t) − μ(ζ_n(·,t))|⁴)` for each `n`.
///
/// Monte Carlo ensembles center with the mean of the even-indexed members
/// and average over the odd-indexed ones; finite spaces are exact.
pub fn fourth_moment_series(
    f: &Observable<f64>,
    scheme: &TriangularArrayScheme<f64>,
    t: f64,
    n_values: &[usize],
    ensemble: &Ensemble,
) -> Result<Vec<MomentRow>> {
    if !(0.0..=1.0).contains(&t) {
        return usage(format!("t must lie in [0, 1], got {t}"));
    }
    if n_values.contains(&0) {
        return usage("array level n must be at least 1");
    }
    if !ensemble.is_exact() && ensemble.len() < 4 {
        return usage("split-sample centering needs at least 4 samples");
    }
    let seed = ensemble.seed();
    n_values
        .iter()
        .map(|&n| {
            let z = zeta_values(f, scheme, n, t, ensemble);
            let est = if ensemble.is_exact() {
                let w = ensemble.weights();
                let mean: f64 = z.iter().zip(&w).map(|(v, w)| v * w).sum();
                let fourth: Vec<f64> = z.iter().map(|v| (v - mean).powi(4)).collect();
                EnsembleEstimate::exact(&fourth, &w, seed)
            } else {
                let centering: Vec<f64> = z.iter().step_by(2).copied().collect();
                let mean = centering.iter().sum::<f64>() / centering.len() as f64;
                let fourth: Vec<f64> = z.iter().skip(1).step_by(2).map(|v| (v - mean).powi(4)).collect();
                EnsembleEstimate::from_samples(&fourth, seed)
            };
            let scale = n as f64 * (n as f64).ln().powi(2);
            Ok(MomentRow {
                n,
                m4: est.mean,
                std_error: est.std_error,
                samples: est.samples,
                n_log2_scaled: scale * est.mean,
                scaled_std_error: scale * est.std_error,
                seed,
            })
        })
        .collect()
}

/// No later row exceeds an earlier one by more than three combined standard errors.
pub fn no_systematic_growth(rows: &[MomentRow]) -> bool {
    rows.iter().enumerate().all(|(i, a)| {
        rows[i + 1..].iter().all(|b| {
            let sigma = (a.scaled_std_error.powi(2) + b.scaled_std_error.powi(2)).sqrt();
            b.n_log2_scaled - a.n_log2_scaled <= 3.0 * sigma
        })
    })
}
