//! Transfer operators in the Fourier basis.
//!
//! For `φ` on the circle write `φ̂_j = ∫ φ e^{−2πijx}`. The transfer operator
//! of `T` acts by `(Lφ)^_j = Σ_k M_{jk} φ̂_k` with
//! `M_{jk} = ∫ e^{2πi(kx − jT(x))} dx`, evaluated by the trapezoid rule, which
//! is spectrally accurate because the integrand is analytic and periodic.
//! Truncating to `|j|, |k| ≤ K` converges exponentially in `K` for analytic
//! expanding maps, so correlations can be resolved far below Monte Carlo
//! noise. Truncation error is estimated by comparing `K` with `2K`.

use num_complex::Complex64;

use crate::error::{usage, Result};
use crate::maps::ExpandingMapParams;
use crate::observable::Observable;
use crate::scheme::TriangularArrayScheme;
use crate::statistics::EnsembleEstimate;

pub const DEFAULT_CUTOFF: usize = 32;
/// Absolute floor on the reported error, covering accumulated rounding.
pub const ROUNDING_FLOOR: f64 = 1e-15;
const OBSERVABLE_NODES: usize = 1 << 14;

/// Coefficients `φ̂_{−K..=K}` stored at offset `K`.
pub type Coefficients = Vec<Complex64>;

fn twiddle(frac: f64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * frac)
}

#[derive(Debug, Clone)]
pub struct FourierTransfer {
    cutoff: usize,
    matrix: Vec<Complex64>,
}

impl FourierTransfer {
    pub fn new(p: &ExpandingMapParams<f64>, cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return usage("Fourier cutoff must be positive");
        }
        let width = 2 * cutoff + 1;
        let bandwidth = cutoff as f64 * (p.degree as f64 + p.amplitude.abs() + 1.0) + 64.0;
        let nodes = (4.0 * bandwidth).max(64.0).log2().ceil().exp2() as usize;
        let xs: Vec<f64> = (0..nodes).map(|q| q as f64 / nodes as f64).collect();
        let ts: Vec<f64> = xs.iter().map(|&x| p.lift(x)).collect();
        // e^{2πikx_q}, rows k = −K..=K
        let waves: Vec<Complex64> = (0..width)
            .flat_map(|c| {
                let k = c as f64 - cutoff as f64;
                xs.iter().map(move |&x| twiddle((k * x).rem_euclid(1.0)))
            })
            .collect();
        let mut matrix = vec![Complex64::new(0.0, 0.0); width * width];
        let mut pulled = vec![Complex64::new(0.0, 0.0); nodes];
        for r in 0..width {
            let j = r as f64 - cutoff as f64;
            for (slot, t) in pulled.iter_mut().zip(&ts) {
                *slot = twiddle((-j * t).rem_euclid(1.0));
            }
            for c in 0..width {
                let wave = &waves[c * nodes..(c + 1) * nodes];
                let s: Complex64 = pulled.iter().zip(wave).map(|(a, b)| a * b).sum();
                matrix[r * width + c] = s / nodes as f64;
            }
        }
        Ok(Self { cutoff, matrix })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn apply(&self, phi: &[Complex64]) -> Coefficients {
        let width = 2 * self.cutoff + 1;
        (0..width).map(|r| self.matrix[r * width..(r + 1) * width].iter().zip(phi).map(|(m, v)| m * v).sum()).collect()
    }
}

/// `f̂_{−K..=K}` by a fine trapezoid rule.
pub fn fourier_coefficients(f: &Observable<f64>, cutoff: usize) -> Coefficients {
    let nodes = OBSERVABLE_NODES.max(8 * cutoff);
    let samples: Vec<f64> = (0..nodes).map(|q| f.eval_raw(q as f64 / nodes as f64)).collect();
    (0..=2 * cutoff)
        .map(|c| {
            let j = c as f64 - cutoff as f64;
            let s: Complex64 =
                samples.iter().enumerate().map(|(q, v)| twiddle((-j * q as f64 / nodes as f64).rem_euclid(1.0)) * v).sum();
            s / nodes as f64
        })
        .collect()
}

/// `∫ f ρ = Σ_j f̂_j ρ̂_{−j}`.
pub fn pair(f: &[Complex64], rho: &[Complex64]) -> f64 {
    f.iter().zip(rho.iter().rev()).map(|(a, b)| a * b).sum::<Complex64>().re
}

/// Coefficients of the product `f·ρ`, truncated to the same band.
pub fn multiply(f: &[Complex64], rho: &[Complex64]) -> Coefficients {
    let k = (f.len() - 1) / 2;
    let width = f.len();
    (0..width)
        .map(|r| {
            let j = r as isize - k as isize;
            (0..width)
                .filter_map(|c| {
                    let l = c as isize - k as isize;
                    let idx = j - l + k as isize;
                    (0..width as isize).contains(&idx).then(|| f[c] * rho[idx as usize])
                })
                .sum()
        })
        .collect()
}

fn lebesgue(cutoff: usize) -> Coefficients {
    let mut v = vec![Complex64::new(0.0, 0.0); 2 * cutoff + 1];
    v[cutoff] = Complex64::new(1.0, 0.0);
    v
}

/// Walks the level-`n` array applying `T_{n,k}` for `k` in `range`, reusing operators.
struct Propagator<'a> {
    scheme: &'a TriangularArrayScheme<f64>,
    n: usize,
    cutoff: usize,
    cached: Option<(ExpandingMapParams<f64>, FourierTransfer)>,
}

impl Propagator<'_> {
    fn step(&mut self, k: usize, phi: &[Complex64]) -> Result<Coefficients> {
        let p = self.scheme.map_at(self.n, k);
        if self.cached.as_ref().map(|(q, _)| *q != p).unwrap_or(true) {
            self.cached = Some((p, FourierTransfer::new(&p, self.cutoff)?));
        }
        Ok(self.cached.as_ref().unwrap().1.apply(phi))
    }
}

/// Lebesgue two-point correlations `c(g) = m(f_{n,k1} f_{n,k1+g}) − m(f_{n,k1}) m(f_{n,k1+g})`.
pub fn spectral_correlations(
    f: &Observable<f64>,
    scheme: &TriangularArrayScheme<f64>,
    n: usize,
    k1: usize,
    gaps: &[usize],
    cutoff: usize,
) -> Result<Vec<f64>> {
    if gaps.contains(&0) {
        return usage("gaps must be positive");
    }
    let g_max = gaps.iter().copied().max().unwrap_or(0);
    if k1 + g_max > n {
        return usage(format!("k1 + gap exceeds level n = {n}"));
    }
    let fh = fourier_coefficients(f, cutoff);
    let mut prop = Propagator { scheme, n, cutoff, cached: None };
    let mut rho = lebesgue(cutoff);
    for k in 1..=k1 {
        rho = prop.step(k, &rho)?;
    }
    let mean_k1 = pair(&fh, &rho);
    // carry both the weighted density f_{k1}·ρ_{k1} and the density itself
    let mut weighted = multiply(&fh, &rho);
    let mut by_gap = vec![0.0];
    for g in 1..=g_max {
        rho = prop.step(k1 + g, &rho)?;
        weighted = prop.step(k1 + g, &weighted)?;
        by_gap.push(pair(&fh, &weighted) - mean_k1 * pair(&fh, &rho));
    }
    Ok(gaps.iter().map(|&g| by_gap[g]).collect())
}

/// Correlations with a truncation error estimate `|c_K − c_{2K}|` in place of a standard error.
pub fn spectral_correlation_estimates(
    f: &Observable<f64>,
    scheme: &TriangularArrayScheme<f64>,
    n: usize,
    k1: usize,
    gaps: &[usize],
    cutoff: usize,
) -> Result<Vec<(usize, EnsembleEstimate)>> {
    let coarse = spectral_correlations(f, scheme, n, k1, gaps, cutoff)?;
    let fine = spectral_correlations(f, scheme, n, k1, gaps, 2 * cutoff)?;
    Ok(gaps
        .iter()
        .zip(coarse.iter().zip(&fine))
        .map(|(&g, (c, d))| (g, EnsembleEstimate { mean: *d, std_error: (c - d).abs().max(ROUNDING_FLOOR), samples: 0, seed: 0 }))
        .collect())
}

/// `m(f_{n,k})` for `k = 0..=n` with `m` Lebesgue.
pub fn spectral_pushforward(f: &Observable<f64>, scheme: &TriangularArrayScheme<f64>, n: usize, cutoff: usize) -> Result<Vec<f64>> {
    let fh = fourier_coefficients(f, cutoff);
    let mut prop = Propagator { scheme, n, cutoff, cached: None };
    let mut rho = lebesgue(cutoff);
    let mut out = vec![pair(&fh, &rho)];
    for k in 1..=n {
        rho = prop.step(k, &rho)?;
        out.push(pair(&fh, &rho));
    }
    Ok(out)
}

/// Invariant density of a single map by power iteration in the Fourier basis.
pub fn spectral_invariant_density(p: &ExpandingMapParams<f64>, cutoff: usize, tolerance: f64) -> Result<Coefficients> {
    let op = FourierTransfer::new(p, cutoff)?;
    let mut rho = lebesgue(cutoff);
    for _ in 0..10_000 {
        let next = op.apply(&rho);
        let change: f64 = next.iter().zip(&rho).map(|(a, b)| (a - b).norm()).sum();
        rho = next;
        if change <= tolerance {
            return Ok(rho);
        }
    }
    Err(crate::error::QdsError::NonConvergence { iterations: 10_000, residual: f64::NAN })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{CurveSpec, PowerLaw};
    use crate::ulam::{measure_expectation, srb_density};

    fn ramp() -> TriangularArrayScheme<f64> {
        TriangularArrayScheme::canonical(CurveSpec::power_law(2, PowerLaw::linear(0.0, 0.5)).unwrap())
    }

    #[test]
    fn doubling_matrix_is_a_selection() {
        let op = FourierTransfer::new(&ExpandingMapParams::linear(2), 8).unwrap();
        let w = 17;
        for r in 0..w {
            for c in 0..w {
                let (j, k) = (r as i64 - 8, c as i64 - 8);
                let expect = if k == 2 * j { 1.0 } else { 0.0 };
                assert!((op.matrix[r * w + c] - Complex64::new(expect, 0.0)).norm() < 1e-13, "j={j} k={k}");
            }
        }
    }

    #[test]
    fn coefficients_of_trigonometric_observables() {
        let c = fourier_coefficients(&Observable::cos(1), 4);
        for (i, v) in c.iter().enumerate() {
            let expect = if i == 3 || i == 5 { 0.5 } else { 0.0 };
            assert!((v - Complex64::new(expect, 0.0)).norm() < 1e-14);
        }
        let one = fourier_coefficients(&Observable::Constant { value: 1.0 }, 4);
        assert!((pair(&c, &one)).abs() < 1e-14);
        let sq = multiply(&c, &c);
        // cos² = 1/2 + cos(4πx)/2
        assert!((pair(&one, &sq) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn doubling_correlations_vanish() {
        let scheme = TriangularArrayScheme::canonical(CurveSpec::constant(ExpandingMapParams::linear(2)));
        let c = spectral_correlations(&Observable::cos(1), &scheme, 40, 10, &[1, 2, 5, 20], 16).unwrap();
        assert!(c.iter().all(|v| v.abs() < 1e-14), "{c:?}");
    }

    #[test]
    fn invariant_density_matches_ulam() {
        let p = ExpandingMapParams::new(2, 0.5, 0.0);
        let rho = spectral_invariant_density(&p, 32, 1e-14).unwrap();
        let f = Observable::cos(1);
        let spectral = pair(&fourier_coefficients(&f, 32), &rho);
        let ulam = measure_expectation(&srb_density(&p, 1024, 64, 1e-13).unwrap(), &f).value;
        assert!((spectral - ulam).abs() < 2e-3, "{spectral} vs {ulam}");
        assert!(spectral.abs() > 1e-3);
        assert!((rho[32].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pushforward_matches_ulam_pushforward() {
        use crate::srb::{pushforward_expectations, UlamSettings};
        let f = Observable::cos(1);
        let a = spectral_pushforward(&f, &ramp(), 50, 32).unwrap();
        let b = pushforward_expectations(&ramp(), 50, &f, UlamSettings { bins: 1024, subsamples: 32, tolerance: 1e-12 }).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 2e-3, "{x} vs {y}");
        }
    }

    #[test]
    fn truncation_converges() {
        let f = Observable::cos(1);
        let a = spectral_correlations(&f, &ramp(), 100, 80, &[1, 3, 6], 24).unwrap();
        let b = spectral_correlations(&f, &ramp(), 100, 80, &[1, 3, 6], 48).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
        assert!(b[0].abs() > 1e-2);
    }

    #[test]
    fn agrees_with_monte_carlo() {
        use crate::sampling::Ensemble;
        use crate::statistics::correlation_decay;
        let f = Observable::cos(1);
        let gaps = [1, 2, 3];
        let exact = spectral_correlations(&f, &ramp(), 100, 80, &gaps, 32).unwrap();
        let mc = correlation_decay(&f, &ramp(), 100, 80, &gaps, &Ensemble::lebesgue(100_000, 3).unwrap()).unwrap();
        for ((_, e), x) in mc.iter().zip(&exact) {
            assert!(e.consistent_with(*x, 4.0), "{e:?} vs {x}");
        }
    }

    #[test]
    fn gap_beyond_level_is_rejected() {
        assert!(spectral_correlations(&Observable::cos(1), &ramp(), 10, 8, &[3], 8).is_err());
        assert!(spectral_correlations(&Observable::cos(1), &ramp(), 10, 2, &[0], 8).is_err());
        assert!(FourierTransfer::new(&ExpandingMapParams::linear(2), 0).is_err());
    }
}
