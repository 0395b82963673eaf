//! Ulam discretization of the transfer operator of an expanding circle map.

use rayon::prelude::*;

use crate::error::{usage, QdsError, Result};
use crate::maps::ExpandingMapParams;
use crate::observable::Observable;
use crate::scalar::Real;

pub const DEFAULT_BINS: usize = 1024;
pub const DEFAULT_SUBSAMPLES: usize = 64;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITERATIONS: usize = 20_000;

/// Row-stochastic `P_{ij} ≈ m(B_i ∩ T⁻¹B_j)/m(B_i)` over `N` uniform bins,
/// stored as sparse rows sorted by column.
#[derive(Debug, Clone, PartialEq)]
pub struct UlamOperator<T> {
    bins: usize,
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Real> UlamOperator<T> {
    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn row(&self, i: usize) -> &[(usize, T)] {
        &self.rows[i]
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        self.rows
            .iter()
            .map(|r| {
                let mut d = vec![T::zero(); self.bins];
                for &(j, p) in r {
                    d[j] = p;
                }
                d
            })
            .collect()
    }

    /// Largest `|Σ_j P_ij − 1|`.
    pub fn max_row_defect(&self) -> T {
        self.rows.iter().fold(T::zero(), |a, r| {
            let s = r.iter().fold(T::zero(), |s, e| s + e.1);
            a.max((s - T::one()).abs())
        })
    }

    /// Row vector times matrix, `uP`.
    pub fn apply(&self, u: &[T]) -> Vec<T> {
        let mut v = vec![T::zero(); self.bins];
        for (ui, row) in u.iter().zip(&self.rows) {
            if *ui == T::zero() {
                continue;
            }
            for &(j, p) in row {
                v[j] += *ui * p;
            }
        }
        v
    }
}

/// Builds the Ulam matrix of `p` with `bins` cells.
///
/// Each cell is split into `subsamples` stratified sub-cells. A sub-cell is
/// pushed through the monotone lift and its image interval is apportioned
/// over target cells by overlap length, so the construction is exact for
/// the linear maps `x ↦ m·x`. Rows are renormalized to sum to one.
pub fn build_ulam<T: Real>(p: &ExpandingMapParams<T>, bins: usize, subsamples: usize) -> Result<UlamOperator<T>> {
    if bins < 2 {
        return usage(format!("Ulam operator needs at least 2 bins, got {bins}"));
    }
    if subsamples < 4 {
        return usage(format!("Ulam operator needs at least 4 subsamples per bin, got {subsamples}"));
    }
    let nf = T::from_usize_lossy(bins);
    let qf = T::from_usize_lossy(subsamples);
    let rows = (0..bins)
        .into_par_iter()
        .map(|i| {
            let mut acc: Vec<(usize, T)> = Vec::with_capacity(2 * p.degree as usize + 4);
            let edge = |j: usize| (T::from_usize_lossy(i) + T::from_usize_lossy(j) / qf) / nf;
            let mut lo = p.lift(edge(0)) * nf;
            for j in 0..subsamples {
                let hi = p.lift(edge(j + 1)) * nf;
                let len = hi - lo;
                let weight = T::one() / qf;
                let mut c = lo.floor();
                while c < hi {
                    let overlap = hi.min(c + T::one()) - lo.max(c);
                    if overlap > T::zero() {
                        let cell = c.to_i64().unwrap().rem_euclid(bins as i64) as usize;
                        acc.push((cell, weight * overlap / len));
                    }
                    c += T::one();
                }
                lo = hi;
            }
            acc.sort_by_key(|e| e.0);
            let mut row: Vec<(usize, T)> = Vec::with_capacity(acc.len());
            for (j, v) in acc {
                match row.last_mut() {
                    Some(last) if last.0 == j => last.1 += v,
                    _ => row.push((j, v)),
                }
            }
            let sum = row.iter().fold(T::zero(), |s, e| s + e.1);
            for e in &mut row {
                e.1 /= sum;
            }
            row
        })
        .collect();
    Ok(UlamOperator { bins, rows })
}

/// Discretized SRB density: probability masses of the uniform bins.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantDensity<T> {
    pub bin_masses: Vec<T>,
    /// `‖uP − u‖₁` for the returned `u`.
    pub residual: T,
    pub iterations: usize,
}

impl<T: Real> InvariantDensity<T> {
    pub fn bins(&self) -> usize {
        self.bin_masses.len()
    }

    pub fn uniform(bins: usize) -> Self {
        let m = T::one() / T::from_usize_lossy(bins);
        Self { bin_masses: vec![m; bins], residual: T::zero(), iterations: 0 }
    }
}

/// Power iteration from the uniform vector until `‖uP − u‖₁ ≤ tol`.
pub fn stationary_density<T: Real>(op: &UlamOperator<T>, tol: T, max_iterations: usize) -> Result<InvariantDensity<T>> {
    let n = op.bins();
    let mut u = vec![T::one() / T::from_usize_lossy(n); n];
    let mut residual = T::infinity();
    for it in 0..=max_iterations {
        let mut v = op.apply(&u);
        residual = u.iter().zip(&v).fold(T::zero(), |a, (x, y)| a + (*x - *y).abs());
        if residual <= tol {
            return Ok(InvariantDensity { bin_masses: u, residual, iterations: it });
        }
        let s = v.iter().fold(T::zero(), |a, x| a + *x);
        for x in &mut v {
            *x /= s;
        }
        u = v;
    }
    Err(QdsError::NonConvergence { iterations: max_iterations, residual: residual.to_f64_lossy() })
}

/// Midpoint-rule expectation with its quadrature error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expectation<T> {
    pub value: T,
    /// `Lip(f)·(bin width)/2`
    pub quadrature_bound: T,
}

/// `Σᵢ massᵢ · f(midpoint of Bᵢ)`.
pub fn measure_expectation<T: Real>(d: &InvariantDensity<T>, f: &Observable<T>) -> Expectation<T> {
    expectation_of_masses(&d.bin_masses, f)
}

pub fn expectation_of_masses<T: Real>(masses: &[T], f: &Observable<T>) -> Expectation<T> {
    let n = masses.len();
    let nf = T::from_usize_lossy(n);
    let half = T::lit(0.5);
    let value = masses
        .iter()
        .enumerate()
        .fold(T::zero(), |a, (i, m)| a + *m * f.eval_raw((T::from_usize_lossy(i) + half) / nf));
    Expectation { value, quadrature_bound: f.lipschitz_constant() / nf * half }
}

/// Convenience: default-size operator and stationary density for one map.
pub fn srb_density<T: Real>(p: &ExpandingMapParams<T>, bins: usize, subsamples: usize, tol: T) -> Result<InvariantDensity<T>> {
    stationary_density(&build_ulam(p, bins, subsamples)?, tol, DEFAULT_MAX_ITERATIONS)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> f64 {
        DEFAULT_TOLERANCE
    }

    /// Exact preimage measure for `x ↦ m·x`: bin i maps linearly onto the
    /// interval `[m·i/N, m·(i+1)/N)`.
    fn exact_linear_row(m: usize, i: usize, n: usize) -> Vec<f64> {
        let mut row = vec![0.0; n];
        // image covers m consecutive bins (wrapping) when N is a multiple of... general case by overlap
        let lo = (m * i) as f64;
        let hi = (m * (i + 1)) as f64;
        let mut c = lo.floor();
        while c < hi {
            let ov = hi.min(c + 1.0) - lo.max(c);
            row[(c as usize) % n] += ov / (hi - lo);
            c += 1.0;
        }
        row
    }

    #[test]
    fn doubling_rows_are_exact_halves() {
        let op = build_ulam(&ExpandingMapParams::<f64>::linear(2), 4, 64).unwrap();
        let dense = op.to_dense();
        for (i, row) in dense.iter().enumerate() {
            assert_eq!(row, &exact_linear_row(2, i, 4));
            assert_eq!(row.iter().filter(|v| **v == 0.5).count(), 2);
        }
    }

    #[test]
    fn tripling_rows_uniform() {
        let op = build_ulam(&ExpandingMapParams::<f64>::linear(3), 3, 64).unwrap();
        for row in op.to_dense() {
            for v in row {
                assert!((v - 1.0 / 3.0).abs() < 1e-12);
            }
        }
        for n in [5, 7, 16] {
            let op = build_ulam(&ExpandingMapParams::<f64>::linear(3), n, 8).unwrap();
            for (i, row) in op.to_dense().iter().enumerate() {
                for (a, b) in row.iter().zip(exact_linear_row(3, i, n)) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn argument_checks() {
        assert!(build_ulam(&ExpandingMapParams::<f64>::linear(2), 1, 64).is_err());
        assert!(build_ulam(&ExpandingMapParams::<f64>::linear(2), 8, 3).is_err());
    }

    #[test]
    fn rows_stochastic_for_perturbed_maps() {
        for (m, a, phi) in [(2, 0.5, 0.0), (3, 0.9, 1.0), (2, -0.3, 2.5), (4, 1.5, 0.3)] {
            let op = build_ulam(&ExpandingMapParams::new(m, a, phi), 256, 16).unwrap();
            assert!(op.max_row_defect() <= 1e-12);
            assert!(op.to_dense().iter().flatten().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn linear_maps_have_uniform_density() {
        for m in [2, 3] {
            let op = build_ulam(&ExpandingMapParams::<f64>::linear(m), 3 * 4, 64).unwrap();
            let d = stationary_density(&op, tol(), 100).unwrap();
            assert!(d.residual <= tol());
            for v in &d.bin_masses {
                assert!((v - 1.0 / 12.0).abs() < 1e-12);
            }
        }
        let op = build_ulam(&ExpandingMapParams::<f64>::linear(2), 1024, 64).unwrap();
        let d = stationary_density(&op, tol(), 100).unwrap();
        assert_eq!(d.residual, 0.0);
        assert_eq!(d.iterations, 0);
    }

    #[test]
    fn perturbed_density_is_nonuniform_and_refines() {
        let p = ExpandingMapParams::new(2, 0.5, 0.0);
        let f = Observable::cos(1);
        let d512 = srb_density(&p, 512, 64, tol()).unwrap();
        let d1024 = srb_density(&p, 1024, 64, tol()).unwrap();
        assert!(d1024.residual <= tol());
        let spread = d1024.bin_masses.iter().fold(0.0_f64, |a, v| a.max((v * 1024.0 - 1.0).abs()));
        assert!(spread > 0.05, "density should be visibly non-uniform, spread {spread}");
        let e512 = measure_expectation(&d512, &f).value;
        let e1024 = measure_expectation(&d1024, &f).value;
        assert!((e512 - e1024).abs() < 1e-3, "{e512} vs {e1024}");
        let s: f64 = d1024.bin_masses.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_convergence_is_reported() {
        let p = ExpandingMapParams::new(2, 0.5, 0.0);
        let op = build_ulam(&p, 256, 16).unwrap();
        match stationary_density(&op, 1e-300, 3) {
            Err(QdsError::NonConvergence { iterations, residual }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn expectations_under_uniform_density() {
        let d = InvariantDensity::<f64>::uniform(1024);
        let c = measure_expectation(&d, &Observable::Constant { value: 2.5 });
        assert_eq!(c.value, 2.5);
        assert_eq!(c.quadrature_bound, 0.0);
        let e = measure_expectation(&d, &Observable::cos(1));
        assert!(e.value.abs() <= e.quadrature_bound);
        assert!(e.value.abs() < 1e-12);
        let e2 = measure_expectation(&d, &Observable::CosineSquared { harmonic: 1 });
        assert!((e2.value - 0.5).abs() <= e2.quadrature_bound);
        assert!((e2.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn f32_operator() {
        let op = build_ulam(&ExpandingMapParams::new(2, 0.5_f32, 0.0), 64, 8).unwrap();
        assert!(op.max_row_defect() < 1e-5);
        let d = stationary_density(&op, 1e-6, 1000).unwrap();
        let s: f32 = d.bin_masses.iter().sum();
        assert!((s - 1.0).abs() < 1e-5);
    }
}
