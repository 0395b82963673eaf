//! Correlation functions `c^{ℓ,j}_n` along the array.

use serde::{Deserialize, Serialize};

use super::{estimate, EnsembleEstimate};
use crate::error::{usage, Result};
use crate::observable::Observable;
use crate::sampling::Ensemble;
use crate::scheme::TriangularArrayScheme;

/// Below this many Monte Carlo samples an estimate is refused.
pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationSpec {
    pub ell: usize,
    pub j: usize,
    pub k_indices: Vec<usize>,
    pub n: usize,
}

impl CorrelationSpec {
    pub fn new(ell: usize, j: usize, k_indices: Vec<usize>, n: usize) -> Result<Self> {
        let spec = Self { ell, j, k_indices, n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=4).contains(&self.ell) {
            return usage(format!("ell must be in 2..=4, got {}", self.ell));
        }
        if self.j != 1 && self.j != self.ell - 1 {
            return usage(format!("j must be 1 or ell-1, got {}", self.j));
        }
        if self.k_indices.len() != self.ell {
            return usage(format!("need {} indices, got {}", self.ell, self.k_indices.len()));
        }
        if self.k_indices.windows(2).any(|w| w[0] > w[1]) {
            return usage("indices must be nondecreasing");
        }
        if self.k_indices[self.ell - 1] > self.n {
            return usage(format!("index {} exceeds level n = {}", self.k_indices[self.ell - 1], self.n));
        }
        Ok(())
    }
}

fn check_samples(ensemble: &Ensemble) -> Result<()> {
    if !ensemble.is_exact() && ensemble.len() < MIN_SAMPLES {
        return usage(format!("{} samples is too few for a correlation estimate (need {MIN_SAMPLES})", ensemble.len()));
    }
    Ok(())
}

/// `f(x_{n,k})` for each sorted index `k` and each ensemble member.
fn sample_at(
    ensemble: &Ensemble,
    f: &Observable<f64>,
    scheme: &TriangularArrayScheme<f64>,
    n: usize,
    ks: &[usize],
) -> Vec<Vec<f64>> {
    let k_max = ks.last().copied().unwrap_or(0);
    ensemble.map(|m| {
        let mut out = vec![0.0; ks.len()];
        let mut next = 0;
        m.walk(scheme, n, k_max, |k, x| {
            while next < ks.len() && ks[next] == k {
                out[next] = f.eval_raw(x);
                next += 1;
            }
        });
        out
    })
}

/// `ĉ = mean(P) − mean(A)·mean(B)` with a delta-method standard error.
fn covariance_defect(a: &[f64], b: &[f64], weights: &[f64], exact: bool, seed: u64) -> EnsembleEstimate {
    let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    let (ea, eb, ep) = (estimate(a, weights, exact, seed), estimate(b, weights, exact, seed), estimate(&p, weights, exact, seed));
    let mean = ep.mean - ea.mean * eb.mean;
    if exact {
        return EnsembleEstimate { mean, std_error: 0.0, samples: a.len(), seed };
    }
    let influence: Vec<f64> = (0..a.len()).map(|i| p[i] - eb.mean * a[i] - ea.mean * b[i]).collect();
    EnsembleEstimate { mean, ..EnsembleEstimate::from_samples(&influence, seed) }
}

/// Estimates `μ(f_{n,k₁}⋯f_{n,k_ℓ}) − μ(f_{n,k₁}⋯f_{n,k_j}) μ(f_{n,k_{j+1}}⋯f_{n,k_ℓ})`.
pub fn correlation_estimate(
    spec: &CorrelationSpec,
    f: &Observable<f64>,
    scheme: &TriangularArrayScheme<f64>,
    ensemble: &Ensemble,
) -> Result<EnsembleEstimate> {
    spec.validate()?;
    check_samples(ensemble)?;
    let rows = sample_at(ensemble, f, scheme, spec.n, &spec.k_indices);
    let a: Vec<f64> = rows.iter().map(|r| r[..spec.j].iter().product()).collect();
    let b: Vec<f64> = rows.iter().map(|r| r[spec.j..].iter().product()).collect();
    Ok(covariance_defect(&a, &b, &ensemble.weights(), ensemble.is_exact(), ensemble.seed()))
}

/// Two-point correlations `c(g)` between times `k1` and `k1 + g`, all from one sample set.
pub fn correlation_decay(
    f: &Observable<f64>,
    scheme: &TriangularArrayScheme<f64>,
    n: usize,
    k1: usize,
    gaps: &[usize],
    ensemble: &Ensemble,
) -> Result<Vec<(usize, EnsembleEstimate)>> {
    check_samples(ensemble)?;
    let mut ks: Vec<usize> = std::iter::once(k1).chain(gaps.iter().map(|g| k1 + g)).collect();
    ks.sort_unstable();
    ks.dedup();
    if *ks.last().unwrap() > n {
        return usage(format!("k1 + gap exceeds level n = {n}"));
    }
    let rows = sample_at(ensemble, f, scheme, n, &ks);
    let column = |k: usize| {
        let c = ks.binary_search(&k).expect("index sampled");
        rows.iter().map(|r| r[c]).collect::<Vec<f64>>()
    };
    let weights = ensemble.weights();
    let base = column(k1);
    Ok(gaps
        .iter()
        .map(|&g| (g, covariance_defect(&base, &column(k1 + g), &weights, ensemble.is_exact(), ensemble.seed())))
        .collect())
}

/// `μ(f_{n,k})` for each `k` in `ks`, all from one sample set.
pub fn ensemble_means(
    f: &Observable<f64>,
    scheme: &TriangularArrayScheme<f64>,
    n: usize,
    ks: &[usize],
    ensemble: &Ensemble,
) -> Result<Vec<EnsembleEstimate>> {
    if ks.iter().any(|&k| k > n) {
        return usage(format!("time index exceeds level n = {n}"));
    }
    let mut sorted = ks.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let rows = sample_at(ensemble, f, scheme, n, &sorted);
    let weights = ensemble.weights();
    Ok(ks
        .iter()
        .map(|k| {
            let c = sorted.binary_search(k).expect("index sampled");
            let column: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            estimate(&column, &weights, ensemble.is_exact(), ensemble.seed())
        })
        .collect())
}

/// `μ(f̄_{n,⌊nt₁⌋}⋯f̄_{n,⌊nt₄⌋})` with plug-in centering; symmetric in the four times.
pub fn centered_four_point(
    f: &Observable<f64>,
    scheme: &TriangularArrayScheme<f64>,
    n: usize,
    times: [f64; 4],
    ensemble: &Ensemble,
) -> Result<EnsembleEstimate> {
    if times.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return usage("times must lie in [0, 1]");
    }
    let mut ks: Vec<usize> = times.iter().map(|t| ((n as f64 * t).floor() as usize).min(n)).collect();
    ks.sort_unstable();
    let rows = sample_at(ensemble, f, scheme, n, &ks);
    let weights = ensemble.weights();
    let exact = ensemble.is_exact();
    let means: Vec<f64> = (0..4)
        .map(|c| estimate(&rows.iter().map(|r| r[c]).collect::<Vec<_>>(), &weights, exact, ensemble.seed()).mean)
        .collect();
    let products: Vec<f64> = rows.iter().map(|r| (0..4).map(|c| r[c] - means[c]).product()).collect();
    Ok(estimate(&products, &weights, exact, ensemble.seed()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{CurveSpec, PowerLaw};
    use crate::maps::ExpandingMapParams;
    use crate::sampling::Sampler;

    fn doubling() -> TriangularArrayScheme<f64> {
        TriangularArrayScheme::canonical(CurveSpec::constant(ExpandingMapParams::linear(2)))
    }

    #[test]
    fn spec_validation() {
        assert!(CorrelationSpec::new(2, 1, vec![0, 3], 10).is_ok());
        assert!(CorrelationSpec::new(4, 3, vec![0, 1, 1, 2], 10).is_ok());
        assert!(CorrelationSpec::new(4, 2, vec![0, 1, 1, 2], 10).is_err());
        assert!(CorrelationSpec::new(5, 1, vec![0; 5], 10).is_err());
        assert!(CorrelationSpec::new(2, 1, vec![3, 0], 10).is_err());
        assert!(CorrelationSpec::new(2, 1, vec![0, 11], 10).is_err());
        assert!(CorrelationSpec::new(3, 1, vec![0, 1], 10).is_err());
    }

    #[test]
    fn constant_observable_is_uncorrelated() {
        let e = Ensemble::lebesgue(200, 1).unwrap();
        let spec = CorrelationSpec::new(3, 1, vec![0, 2, 5], 10).unwrap();
        let c = correlation_estimate(&spec, &Observable::Constant { value: 3.0 }, &doubling(), &e).unwrap();
        assert_eq!(c.mean, 0.0);
    }

    #[test]
    fn too_few_samples() {
        let e = Ensemble::lebesgue(99, 1).unwrap();
        let spec = CorrelationSpec::new(2, 1, vec![0, 1], 10).unwrap();
        assert!(correlation_estimate(&spec, &Observable::cos(1), &doubling(), &e).is_err());
    }

    #[test]
    fn variance_of_cosine() {
        let e = Ensemble::lebesgue(20_000, 2).unwrap();
        let spec = CorrelationSpec::new(2, 1, vec![0, 0], 10).unwrap();
        let c = correlation_estimate(&spec, &Observable::cos(1), &doubling(), &e).unwrap();
        assert!(c.consistent_with(0.5, 3.0), "{c:?}");
        assert!(c.std_error > 0.0 && c.std_error < 0.01);
    }

    #[test]
    fn doubling_cosine_correlation_vanishes() {
        let e = Ensemble::lebesgue(20_000, 3).unwrap();
        let spec = CorrelationSpec::new(2, 1, vec![5, 25], 30).unwrap();
        let c = correlation_estimate(&spec, &Observable::cos(1), &doubling(), &e).unwrap();
        assert!(c.consistent_with(0.0, 3.0), "{c:?}");
        let decay = correlation_decay(&Observable::cos(1), &doubling(), 30, 5, &[20], &e).unwrap();
        assert_eq!(decay[0].1, c);
    }

    #[test]
    fn exact_space_matches_hand_computation() {
        let e = Ensemble::new(Sampler::discrete(vec![0.0, 0.25, 0.5], vec![0.5, 0.25, 0.25]).unwrap(), 0, 0).unwrap();
        let spec = CorrelationSpec::new(2, 1, vec![0, 0], 4).unwrap();
        let c = correlation_estimate(&spec, &Observable::cos(1), &doubling(), &e).unwrap();
        // cos values 1, 0, −1: mean 1/4, second moment 3/4
        assert!((c.mean - (0.75 - 0.0625)).abs() < 1e-15);
        assert_eq!(c.std_error, 0.0);
    }

    #[test]
    fn lebesgue_is_invariant_under_linear_maps() {
        let scheme = TriangularArrayScheme::canonical(CurveSpec::piecewise_linear_maps(&[2, 3], &[0.5]).unwrap());
        let e = Ensemble::lebesgue(5000, 11).unwrap();
        let f = Observable::CosineSquared { harmonic: 1 };
        let means = ensemble_means(&f, &scheme, 1000, &[0, 250, 500, 999, 1000], &e).unwrap();
        for m in &means {
            assert!(m.consistent_with(0.5, 4.0), "{m:?}");
        }
        assert!(ensemble_means(&f, &scheme, 10, &[11], &e).is_err());
    }

    #[test]
    fn seed_determinism() {
        let scheme = TriangularArrayScheme::canonical(CurveSpec::power_law(2, PowerLaw::linear(0.1, 0.5)).unwrap());
        let spec = CorrelationSpec::new(2, 1, vec![3, 7], 50).unwrap();
        let run = |seed| correlation_estimate(&spec, &Observable::cos(1), &scheme, &Ensemble::lebesgue(500, seed).unwrap()).unwrap();
        assert_eq!(run(4), run(4));
        assert_ne!(run(4), run(5));
    }

    #[test]
    fn four_point_is_permutation_invariant() {
        let scheme = TriangularArrayScheme::canonical(CurveSpec::power_law(2, PowerLaw::linear(0.0, 0.5)).unwrap());
        let e = Ensemble::lebesgue(2000, 8).unwrap();
        let f = Observable::cos(1);
        let t = [0.1, 0.5, 0.33, 0.9];
        let base = centered_four_point(&f, &scheme, 40, t, &e).unwrap();
        for p in [[3, 2, 1, 0], [1, 0, 3, 2], [2, 3, 0, 1]] {
            let q = centered_four_point(&f, &scheme, 40, p.map(|i| t[i]), &e).unwrap();
            assert_eq!(base, q);
        }
        assert!(centered_four_point(&f, &scheme, 40, [0.0, 0.5, 1.2, 0.3], &e).is_err());
    }
}
