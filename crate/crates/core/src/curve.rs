//! Piecewise-Hölder curves of expanding maps and the array rate condition.

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::maps::{c1_distance_fast, ExpandingMapParams, LambdaAstar};
use crate::scalar::Real;
use crate::scheme::TriangularArrayScheme;

/// `t ↦ offset + scale·(t − piece_start)^exponent` on one piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct PowerLaw<T> {
    #[serde(default)]
    pub offset: T,
    #[serde(default)]
    pub scale: T,
    #[serde(default = "one")]
    pub exponent: T,
}

fn one<T: Real>() -> T {
    T::one()
}

impl<T: Real> PowerLaw<T> {
    pub fn constant(v: T) -> Self {
        Self { offset: v, scale: T::zero(), exponent: T::one() }
    }

    pub fn linear(offset: T, slope: T) -> Self {
        Self { offset, scale: slope, exponent: T::one() }
    }

    pub fn is_constant(&self) -> bool {
        self.scale == T::zero()
    }

    #[inline]
    pub fn at(&self, elapsed: T) -> T {
        if self.is_constant() {
            self.offset
        } else if self.exponent == T::one() {
            self.offset + self.scale * elapsed.max(T::zero())
        } else {
            self.offset + self.scale * elapsed.max(T::zero()).powf(self.exponent)
        }
    }

    /// Hölder exponent and constant on an interval of length `len`.
    pub fn holder(&self, len: T) -> (T, T) {
        if self.is_constant() {
            return (T::one(), T::zero());
        }
        if self.exponent <= T::one() {
            (self.exponent, self.scale.abs())
        } else {
            (T::one(), self.scale.abs() * self.exponent * len.powf(self.exponent - T::one()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct CurvePiece<T> {
    pub start: T,
    pub end: T,
    pub degree: u32,
    pub amplitude: PowerLaw<T>,
    #[serde(default = "zero_law")]
    pub phase: PowerLaw<T>,
}

fn zero_law<T: Real>() -> PowerLaw<T> {
    PowerLaw::constant(T::zero())
}

impl<T: Real> CurvePiece<T> {
    #[inline]
    pub fn params_at(&self, t: T) -> ExpandingMapParams<T> {
        let e = t - self.start;
        ExpandingMapParams::new(self.degree, self.amplitude.at(e), self.phase.at(e))
    }

    pub fn is_constant(&self) -> bool {
        self.amplitude.is_constant() && self.phase.is_constant()
    }
}

/// A path `t ↦ γ_t` of expanding maps over `[0, 1]`.
///
/// Pieces partition `[0, 1]` as half-open intervals `[start, end)`, the last one
/// closed. The degree is fixed on each piece; jumps happen only at piece
/// boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct CurveSpec<T> {
    pub pieces: Vec<CurvePiece<T>>,
    pub holder_exponent: T,
}

impl<T: Real> CurveSpec<T> {
    pub fn new(pieces: Vec<CurvePiece<T>>, holder_exponent: T) -> Result<Self> {
        let c = Self { pieces, holder_exponent };
        c.validate()?;
        Ok(c)
    }

    /// Constant curve at one map.
    pub fn constant(map: ExpandingMapParams<T>) -> Self {
        Self {
            pieces: vec![CurvePiece {
                start: T::zero(),
                end: T::one(),
                degree: map.degree,
                amplitude: PowerLaw::constant(map.amplitude),
                phase: PowerLaw::constant(map.phase),
            }],
            holder_exponent: T::one(),
        }
    }

    /// Degree `degree`, amplitude `offset + scale·t^exponent`, phase 0.
    pub fn power_law(degree: u32, amplitude: PowerLaw<T>) -> Result<Self> {
        let eta = amplitude.holder(T::one()).0;
        Self::new(
            vec![CurvePiece { start: T::zero(), end: T::one(), degree, amplitude, phase: zero_law() }],
            eta,
        )
    }

    /// Piecewise-constant curve through linear maps, switching degree at `jumps`.
    pub fn piecewise_linear_maps(degrees: &[u32], jumps: &[T]) -> Result<Self> {
        if degrees.len() != jumps.len() + 1 {
            return config("need exactly one more degree than jump points");
        }
        let mut bounds = vec![T::zero()];
        bounds.extend_from_slice(jumps);
        bounds.push(T::one());
        let pieces = degrees
            .iter()
            .enumerate()
            .map(|(i, &m)| CurvePiece {
                start: bounds[i],
                end: bounds[i + 1],
                degree: m,
                amplitude: PowerLaw::constant(T::zero()),
                phase: zero_law(),
            })
            .collect();
        Self::new(pieces, T::one())
    }

    pub fn validate(&self) -> Result<()> {
        if self.pieces.is_empty() {
            return config("curve has no pieces");
        }
        if !(self.holder_exponent > T::zero() && self.holder_exponent <= T::one()) {
            return config(format!("Hölder exponent must lie in (0, 1], got {}", self.holder_exponent));
        }
        if self.pieces[0].start != T::zero() {
            return config("first piece must start at t = 0");
        }
        if self.pieces.last().unwrap().end != T::one() {
            return config("last piece must end at t = 1");
        }
        for (i, p) in self.pieces.iter().enumerate() {
            if !(p.start < p.end) {
                return config(format!("piece {i} has empty interval [{}, {})", p.start, p.end));
            }
            if i > 0 && self.pieces[i - 1].end != p.start {
                return config(format!("pieces {} and {i} leave a gap or overlap", i - 1));
            }
            for law in [&p.amplitude, &p.phase] {
                if !law.is_constant() && !(law.exponent > T::zero()) {
                    return config(format!("piece {i}: power-law exponent must be positive"));
                }
                let (eta, _) = law.holder(p.end - p.start);
                if eta < self.holder_exponent {
                    return config(format!(
                        "piece {i}: path exponent {eta} is rougher than the declared Hölder exponent {}",
                        self.holder_exponent
                    ));
                }
            }
        }
        Ok(())
    }

    /// Largest Hölder constant over pieces and parameter paths.
    pub fn holder_constant(&self) -> T {
        self.pieces.iter().fold(T::zero(), |acc, p| {
            let len = p.end - p.start;
            acc.max(p.amplitude.holder(len).1).max(p.phase.holder(len).1)
        })
    }

    /// Jump points (interior piece boundaries).
    pub fn jump_points(&self) -> Vec<T> {
        self.pieces.iter().skip(1).map(|p| p.start).collect()
    }

    fn piece_index(&self, t: T) -> usize {
        self.pieces.iter().position(|p| t < p.end).unwrap_or(self.pieces.len() - 1)
    }

    /// `γ_t`, right-continuous at jump points.
    #[inline]
    pub fn params_at(&self, t: T) -> ExpandingMapParams<T> {
        let t = t.max(T::zero()).min(T::one());
        self.pieces[self.piece_index(t)].params_at(t)
    }

    /// `γ_{t−}`, the left limit (equal to `γ_0` at `t = 0`).
    pub fn params_left(&self, t: T) -> ExpandingMapParams<T> {
        let t = t.max(T::zero()).min(T::one());
        let idx = self.pieces.iter().position(|p| t <= p.end).unwrap_or(self.pieces.len() - 1);
        self.pieces[idx].params_at(t)
    }

    /// True when every piece is constant with identical parameters.
    pub fn is_constant(&self) -> bool {
        let first = self.pieces[0].params_at(T::zero());
        self.pieces.iter().all(|p| p.is_constant() && p.params_at(p.start) == first)
    }

    /// True when every `γ_t` is an integer-linear map (Lebesgue preserving).
    pub fn preserves_lebesgue(&self) -> bool {
        self.pieces.iter().all(|p| p.amplitude.is_constant() && p.amplitude.offset == T::zero())
    }

    /// Checks every map on the curve against `(λ, A*)`, with amplitudes widened
    /// by `slack` (used for perturbed arrays).
    ///
    /// Power-law amplitudes are monotone on each piece, so `|a|` is extremal
    /// at the piece endpoints; interior samples are checked as well.
    pub fn check_admissible(&self, bounds: &LambdaAstar<T>, slack: T) -> Result<()> {
        for p in &self.pieces {
            for j in 0..=16 {
                let t = p.start + (p.end - p.start) * T::from_usize_lossy(j) / T::lit(16.0);
                let mut q = p.params_at(t);
                q.amplitude = q.amplitude.abs() + slack;
                q.check_admissible(bounds)?;
            }
        }
        Ok(())
    }
}

/// Output of [`array_rate_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable<T> {
    pub n_values: Vec<usize>,
    pub sup_distances: Vec<T>,
    /// Log–log least-squares slope; `None` when fewer than two distances are positive.
    pub fitted_slope: Option<T>,
    pub holder_exponent: T,
}

impl<T: Real> RateTable<T> {
    /// Slope within `tolerance` of the optimal `−η` (or all distances zero).
    pub fn passes(&self, tolerance: T) -> bool {
        match self.fitted_slope {
            None => self.sup_distances.iter().all(|d| *d == T::zero()),
            Some(s) => s <= -self.holder_exponent + tolerance,
        }
    }
}

/// Least-squares slope of `ln y` against `ln x`, skipping non-positive entries.
pub fn loglog_slope<T: Real>(xs: &[T], ys: &[T]) -> Option<T> {
    let pts: Vec<(T, T)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > T::zero() && **y > T::zero())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = T::from_usize_lossy(pts.len());
    let mx = pts.iter().fold(T::zero(), |a, p| a + p.0) / k;
    let my = pts.iter().fold(T::zero(), |a, p| a + p.1) / k;
    let sxx = pts.iter().fold(T::zero(), |a, p| a + (p.0 - mx) * (p.0 - mx));
    let sxy = pts.iter().fold(T::zero(), |a, p| a + (p.0 - mx) * (p.1 - my));
    if sxx == T::zero() {
        return None;
    }
    Some(sxy / sxx)
}

/// Measures `sup_t d_{C¹}(T_{n,⌊nt⌋}, γ_t)` for each level in `n_values`.
///
/// On `[k/n, (k+1)/n)` the array is frozen at `T_{n,k}`; the supremum over the
/// cell is sampled at its left end, midpoint and the left limit at its right
/// end.
pub fn array_rate_check<T: Real>(scheme: &TriangularArrayScheme<T>, n_values: &[usize]) -> Result<RateTable<T>> {
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return crate::error::usage("n_values must be strictly ascending");
    }
    let curve = scheme.curve();
    let mut sup_distances = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let nf = T::from_usize_lossy(n);
        let mut sup = T::zero();
        for k in 0..=n {
            let frozen = scheme.map_at(n, k);
            let t0 = T::from_usize_lossy(k) / nf;
            let mut probes = vec![curve.params_at(t0)];
            if k < n {
                let t1 = T::from_usize_lossy(k + 1) / nf;
                probes.push(curve.params_at((t0 + t1) / T::lit(2.0)));
                probes.push(curve.params_left(t1));
            }
            for g in probes {
                sup = sup.max(c1_distance_fast(&frozen, &g, 4096));
            }
        }
        sup_distances.push(sup);
    }
    let xs: Vec<T> = n_values.iter().map(|&n| T::from_usize_lossy(n)).collect();
    let fitted_slope = loglog_slope(&xs, &sup_distances);
    Ok(RateTable { n_values: n_values.to_vec(), sup_distances, fitted_slope, holder_exponent: curve.holder_exponent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{c1_distance, DEFAULT_C1_GRID};

    fn ramp() -> CurveSpec<f64> {
        CurveSpec::power_law(2, PowerLaw::linear(0.0, 0.5)).unwrap()
    }

    #[test]
    fn validation_errors() {
        let mut c = ramp();
        c.pieces[0].end = 0.9;
        assert!(c.validate().is_err());
        let mut c = ramp();
        c.holder_exponent = 0.0;
        assert!(c.validate().is_err());
        let sqrt = PowerLaw { offset: 0.0, scale: 0.5, exponent: 0.5 };
        let c = CurveSpec { pieces: vec![CurvePiece { start: 0.0, end: 1.0, degree: 2, amplitude: sqrt, phase: zero_law() }], holder_exponent: 1.0 };
        assert!(c.validate().is_err(), "declared exponent smoother than the path");
        assert!(CurveSpec::<f64>::piecewise_linear_maps(&[2, 3], &[]).is_err());
        let gap = CurveSpec::new(
            vec![
                CurvePiece { start: 0.0, end: 0.4, degree: 2, amplitude: PowerLaw::constant(0.0), phase: zero_law() },
                CurvePiece { start: 0.5, end: 1.0, degree: 3, amplitude: PowerLaw::constant(0.0), phase: zero_law() },
            ],
            1.0,
        );
        assert!(gap.is_err());
    }

    #[test]
    fn jump_curve_is_right_continuous() {
        let c = CurveSpec::<f64>::piecewise_linear_maps(&[2, 3], &[0.5]).unwrap();
        assert_eq!(c.params_at(0.5).degree, 3);
        assert_eq!(c.params_left(0.5).degree, 2);
        assert_eq!(c.params_at(1.0).degree, 3);
        assert_eq!(c.jump_points(), vec![0.5]);
        assert!(c.preserves_lebesgue());
        assert!(!c.is_constant());
    }

    #[test]
    fn curve_maps_are_admissible() {
        let b = LambdaAstar::new(1.5, 2.0 * std::f64::consts::PI).unwrap();
        let c = ramp();
        c.check_admissible(&b, 0.0).unwrap();
        for i in 0..=100 {
            assert!(c.params_at(i as f64 / 100.0).admissibility(&b).is_admissible());
        }
        assert!(c.check_admissible(&b, 0.1).is_err());
    }

    #[test]
    fn curve_is_holder_in_c1_metric() {
        // Hölder continuity of γ checked directly in d_{C¹} on a t-grid.
        let sqrt = CurveSpec::power_law(2, PowerLaw { offset: 0.0, scale: 0.5, exponent: 0.5 }).unwrap();
        let h = sqrt.holder_constant() * (1.0 + 1.0 / (2.0 * std::f64::consts::PI));
        let ts: Vec<f64> = (0..=64).map(|i| (i as f64 / 64.0).powi(2)).collect();
        for &s in &ts {
            for &t in &ts {
                let d = c1_distance(&sqrt.params_at(s), &sqrt.params_at(t), 1024);
                assert!(d.value <= h * (t - s).abs().powf(0.5) + d.error_bound + 1e-12);
            }
        }
        let _ = DEFAULT_C1_GRID;
    }

    #[test]
    fn constant_curve_rate_is_zero() {
        let scheme = TriangularArrayScheme::canonical(CurveSpec::constant(ExpandingMapParams::new(2, 0.3, 0.0)));
        let table = array_rate_check(&scheme, &[10, 100, 1000]).unwrap();
        assert!(table.sup_distances.iter().all(|d| *d == 0.0));
        assert!(table.fitted_slope.is_none());
        assert!(table.passes(0.1));
    }

    #[test]
    fn lipschitz_ramp_rate_halves() {
        let scheme = TriangularArrayScheme::canonical(ramp());
        let table = array_rate_check(&scheme, &[100, 200, 400, 800]).unwrap();
        for w in table.sup_distances.windows(2) {
            let ratio = w[1] / w[0];
            assert!((ratio - 0.5).abs() < 0.05, "ratio {ratio}");
        }
        assert!(table.passes(0.1));
        // direct value: 0.5/n · (1 + 1/2π)
        let expect = 0.5 / 100.0 * (1.0 + 1.0 / (2.0 * std::f64::consts::PI));
        assert!((table.sup_distances[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn square_root_ramp_slope() {
        let c = CurveSpec::power_law(2, PowerLaw { offset: 0.0, scale: 0.5, exponent: 0.5 }).unwrap();
        assert_eq!(c.holder_exponent, 0.5);
        let scheme = TriangularArrayScheme::canonical(c);
        let ns = [100, 1000, 10000];
        let table = array_rate_check(&scheme, &ns).unwrap();
        // independent regression on directly computed distances
        let direct: Vec<f64> = ns
            .iter()
            .map(|&n| 0.5 * (1.0 / n as f64).sqrt() * (1.0 + 1.0 / (2.0 * std::f64::consts::PI)))
            .collect();
        for (a, b) in table.sup_distances.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-9 * b.max(1.0), "{a} vs {b}");
        }
        let s = table.fitted_slope.unwrap();
        assert!((s + 0.5).abs() < 0.02, "slope {s}");
        assert!(table.passes(0.1));
    }

    #[test]
    fn jump_curve_aligned_levels_have_zero_degree_mismatch() {
        let c = CurveSpec::new(
            vec![
                CurvePiece { start: 0.0, end: 0.5, degree: 2, amplitude: PowerLaw::linear(0.0, 0.5), phase: zero_law() },
                CurvePiece { start: 0.5, end: 1.0, degree: 3, amplitude: PowerLaw::linear(0.25, 0.5), phase: zero_law() },
            ],
            1.0,
        )
        .unwrap();
        let table = array_rate_check(&TriangularArrayScheme::canonical(c), &[100, 1000]).unwrap();
        assert!(table.sup_distances.iter().all(|d| *d < 0.01));
    }

    #[test]
    fn loglog_slope_exact() {
        let xs = [1.0_f64, 10.0, 100.0];
        let ys = [2.0, 0.2, 0.02];
        assert!((loglog_slope(&xs, &ys).unwrap() + 1.0).abs() < 1e-12);
        assert!(loglog_slope(&xs, &[0.0, 0.0, 1.0]).is_none());
    }

    #[test]
    fn rejects_unsorted_levels() {
        assert!(array_rate_check(&TriangularArrayScheme::canonical(ramp()), &[100, 10]).is_err());
    }
}
