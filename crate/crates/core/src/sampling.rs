//! Ensembles of initial points and their orbits.
//!
//! Floating-point orbits of `x ↦ m·x mod 1` lose one base-`m` digit per step
//! and collapse onto `0` after about 53 doublings. Lebesgue-distributed
//! starting points are therefore carried as a 64-bit fixed-point window plus
//! an infinite binary tail that is revealed lazily: under an integer-linear
//! step `m·x = m·w + m·u` the carry `⌊m·u⌋` of a uniform tail `u` is uniform on
//! `{0, …, m−1}` and independent of the new tail `frac(m·u)`, which is again
//! uniform. Integer-linear steps are therefore exact in distribution.
//! Nonlinear steps are evaluated in `f64`.
//!
//! Every ensemble member owns a ChaCha stream selected by its index, so
//! results do not depend on how members are scheduled across threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::maps::ExpandingMapParams;
use crate::observable::Observable;
use crate::scheme::TriangularArrayScheme;
use crate::zeta::{TGrid, ZetaAccumulator};

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;
const TWO_POW_MINUS_53: f64 = 1.0 / 9_007_199_254_740_992.0;

/// A circle point in 64-bit fixed point, optionally with a lazily sampled tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampledPoint {
    window: u64,
    lazy_tail: bool,
}

impl SampledPoint {
    /// A deterministic point (its binary expansion ends after 64 bits).
    pub fn exact(x: f64) -> Self {
        let x = crate::circle::reduce_mod1(x);
        Self { window: (x * TWO_POW_64) as u64, lazy_tail: false }
    }

    /// A Lebesgue-random point drawn from `rng`.
    pub fn lebesgue(rng: &mut impl RngCore) -> Self {
        Self { window: rng.next_u64(), lazy_tail: true }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        (self.window >> 11) as f64 * TWO_POW_MINUS_53
    }

    pub fn has_lazy_tail(&self) -> bool {
        self.lazy_tail
    }

    #[inline]
    pub fn step(&mut self, map: &ExpandingMapParams<f64>, digits: &mut DigitSource) {
        if map.is_linear() {
            let m = map.degree as u64;
            let carry = if self.lazy_tail { digits.below(m) } else { 0 };
            self.window = self.window.wrapping_mul(m).wrapping_add(carry);
        } else {
            let y = crate::circle::reduce_mod1(map.lift(self.value()));
            self.window = (y * TWO_POW_64) as u64;
        }
    }
}

/// Uniform digits for lazy tails, with a bit buffer for power-of-two bases.
#[derive(Debug, Clone)]
pub struct DigitSource {
    rng: ChaCha8Rng,
    buffer: u64,
    available: u32,
}

impl DigitSource {
    pub fn new(rng: ChaCha8Rng) -> Self {
        Self { rng, buffer: 0, available: 0 }
    }

    #[inline]
    pub fn below(&mut self, m: u64) -> u64 {
        if m.is_power_of_two() {
            let bits = m.trailing_zeros();
            if bits == 0 {
                return 0;
            }
            if self.available < bits {
                self.buffer = self.rng.next_u64();
                self.available = 64;
            }
            let d = self.buffer & (m - 1);
            self.buffer >>= bits;
            self.available -= bits;
            d
        } else {
            self.rng.random_range(0..m)
        }
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Counter-style generator for member `index` of the ensemble keyed by `seed`.
pub fn member_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Distribution of initial points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampler {
    /// `M` independent Lebesgue points.
    Lebesgue,
    /// A finite probability space; expectations over it are exact.
    Discrete { points: Vec<f64>, weights: Vec<f64> },
}

impl Sampler {
    pub fn discrete(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return usage("discrete sampler needs one weight per point");
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return usage("discrete sampler weights must be nonnegative");
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return usage(format!("discrete sampler weights sum to {s}, not 1"));
        }
        Ok(Self::Discrete { points, weights })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Self::Discrete { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Member {
    pub index: usize,
    pub start: SampledPoint,
    pub weight: f64,
    seed: u64,
}

impl Member {
    /// Calls `visit(k, x_{n,k})` for `k = 0..=k_max` along the level-`n` orbit.
    pub fn walk<F: FnMut(usize, f64)>(&self, scheme: &TriangularArrayScheme<f64>, n: usize, k_max: usize, mut visit: F) {
        // stream 0 of the member's generator drew the start; tail digits use a disjoint stream
        let mut digits = DigitSource::new(member_rng(self.seed, (self.index as u64) | (1 << 63)));
        let mut x = self.start;
        visit(0, x.value());
        let degenerate = scheme.is_degenerate();
        let fixed = scheme.map_at(n, 0);
        for k in 1..=k_max.min(n) {
            let map = if degenerate { fixed } else { scheme.map_at(n, k) };
            x.step(&map, &mut digits);
            visit(k, x.value());
        }
    }
}

/// A reproducible ensemble of initial points.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    sampler: Sampler,
    size: usize,
    seed: u64,
}

impl Ensemble {
    pub fn new(sampler: Sampler, size: usize, seed: u64) -> Result<Self> {
        if let Sampler::Discrete { points, weights } = &sampler {
            Sampler::discrete(points.clone(), weights.clone())?;
        } else if size == 0 {
            return usage("ensemble size must be positive");
        }
        Ok(Self { sampler, size, seed })
    }

    pub fn lebesgue(size: usize, seed: u64) -> Result<Self> {
        Self::new(Sampler::Lebesgue, size, seed)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    pub fn is_exact(&self) -> bool {
        self.sampler.is_exact()
    }

    pub fn len(&self) -> usize {
        match &self.sampler {
            Sampler::Lebesgue => self.size,
            Sampler::Discrete { points, .. } => points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn member(&self, index: usize) -> Member {
        match &self.sampler {
            Sampler::Lebesgue => {
                let mut rng = member_rng(self.seed, index as u64);
                Member { index, start: SampledPoint::lebesgue(&mut rng), weight: 1.0 / self.size as f64, seed: self.seed }
            }
            Sampler::Discrete { points, weights } => {
                Member { index, start: SampledPoint::exact(points[index]), weight: weights[index], seed: self.seed }
            }
        }
    }

    /// Applies `f` to every member in parallel; output is in member order.
    pub fn map<R: Send, F: Fn(&Member) -> R + Sync>(&self, f: F) -> Vec<R> {
        (0..self.len()).into_par_iter().map(|i| f(&self.member(i))).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.member(i).weight).collect()
    }
}

/// `sup_t |ζ_n(x,t) − ζ_ref(t)|` over `grid` for every member and observable,
/// from one orbit per member. `references[i]` holds `ζ_ref` for
/// `observables[i]` evaluated on `grid`. Output is member-major.
pub fn sup_distance_ensemble(
    ensemble: &Ensemble,
    scheme: &TriangularArrayScheme<f64>,
    n: usize,
    observables: &[Observable<f64>],
    references: &[Vec<f64>],
    grid: &TGrid<f64>,
) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return usage("array level n must be at least 1");
    }
    if observables.len() != references.len() || references.iter().any(|r| r.len() != grid.len()) {
        return usage("need one reference per observable, sampled on the grid");
    }
    Ok(ensemble.map(|m| {
        let mut accs: Vec<ZetaAccumulator<f64>> = observables.iter().map(|_| ZetaAccumulator::new(n, grid.points())).collect();
        m.walk(scheme, n, n, |_, x| {
            for (acc, f) in accs.iter_mut().zip(observables) {
                acc.push(f.eval_raw(x));
            }
        });
        accs.into_iter()
            .zip(references)
            .map(|(acc, r)| acc.finish().iter().zip(r).fold(0.0_f64, |d, (a, b)| d.max((a - b).abs())))
            .collect()
    }))
}
