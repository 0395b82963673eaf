//! Trigonometric perturbations of the linear expanding circle maps
//!
//! `T(x) = m·x + (a/2π)·sin(2πx + φ) mod 1`
//!
//! with `T'(x) = m + a·cos(2πx + φ)` and `T''(x) = −2πa·sin(2πx + φ)`, so
//! `inf T' = m − |a|` and `‖T''‖∞ = 2π|a|` in closed form.

use serde::{Deserialize, Serialize};

use crate::circle::{circle_distance, CirclePoint};
use crate::error::{config, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpandingMapParams<T> {
    pub degree: u32,
    pub amplitude: T,
    pub phase: T,
}

/// Uniform expansion and distortion bounds defining the admissible class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaAstar<T> {
    pub lambda: T,
    pub a_star: T,
}

impl<T: Real> LambdaAstar<T> {
    pub fn new(lambda: T, a_star: T) -> Result<Self> {
        if !(lambda > T::one()) {
            return config(format!("expansion bound lambda must exceed 1, got {lambda}"));
        }
        if !(a_star > T::zero()) {
            return config(format!("distortion bound A* must be positive, got {a_star}"));
        }
        Ok(Self { lambda, a_star })
    }
}

impl<T: Real> Default for LambdaAstar<T> {
    fn default() -> Self {
        Self { lambda: T::lit(1.2), a_star: T::lit(2.0) * T::PI() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport<T> {
    pub min_derivative: T,
    pub max_second_derivative: T,
    pub violations: Vec<String>,
}

impl<T> AdmissibilityReport<T> {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl<T: Real> ExpandingMapParams<T> {
    pub fn new(degree: u32, amplitude: T, phase: T) -> Self {
        Self { degree, amplitude, phase }
    }

    /// The linear map `x ↦ m·x mod 1`.
    pub fn linear(degree: u32) -> Self {
        Self::new(degree, T::zero(), T::zero())
    }

    /// True when the map is exactly `x ↦ m·x mod 1`, which preserves Lebesgue measure.
    pub fn is_linear(&self) -> bool {
        self.amplitude == T::zero()
    }

    fn m(&self) -> T {
        T::from_u32(self.degree).expect("degree fits scalar")
    }

    pub fn min_derivative(&self) -> T {
        self.m() - self.amplitude.abs()
    }

    pub fn max_derivative(&self) -> T {
        self.m() + self.amplitude.abs()
    }

    pub fn max_second_derivative(&self) -> T {
        T::lit(2.0) * T::PI() * self.amplitude.abs()
    }

    /// Unreduced lift `x ↦ m·x + (a/2π) sin(2πx + φ)` on the real line.
    #[inline]
    pub fn lift(&self, x: T) -> T {
        let two_pi = T::lit(2.0) * T::PI();
        self.m() * x + self.amplitude / two_pi * (two_pi * x + self.phase).sin()
    }

    #[inline]
    pub fn eval(&self, x: CirclePoint<T>) -> CirclePoint<T> {
        CirclePoint::new(self.lift(x.value()))
    }

    #[inline]
    pub fn deriv(&self, x: CirclePoint<T>) -> T {
        let two_pi = T::lit(2.0) * T::PI();
        self.m() + self.amplitude * (two_pi * x.value() + self.phase).cos()
    }

    #[inline]
    pub fn second_deriv(&self, x: CirclePoint<T>) -> T {
        let two_pi = T::lit(2.0) * T::PI();
        -two_pi * self.amplitude * (two_pi * x.value() + self.phase).sin()
    }

    pub fn admissibility(&self, bounds: &LambdaAstar<T>) -> AdmissibilityReport<T> {
        let min_derivative = self.min_derivative();
        let max_second_derivative = self.max_second_derivative();
        let mut violations = Vec::new();
        if self.degree < 2 {
            violations.push(format!("degree {} < 2", self.degree));
        }
        if !(min_derivative >= bounds.lambda) {
            violations.push(format!("inf T' = {min_derivative} < lambda = {}", bounds.lambda));
        }
        if !(max_second_derivative <= bounds.a_star) {
            violations.push(format!("sup |T''| = {max_second_derivative} > A* = {}", bounds.a_star));
        }
        if !self.amplitude.is_finite() || !self.phase.is_finite() {
            violations.push("non-finite parameters".to_string());
        }
        AdmissibilityReport { min_derivative, max_second_derivative, violations }
    }

    pub fn check_admissible(&self, bounds: &LambdaAstar<T>) -> Result<()> {
        let report = self.admissibility(bounds);
        if report.is_admissible() {
            Ok(())
        } else {
            config(format!("inadmissible map {self:?}: {}", report.violations.join("; ")))
        }
    }
}

/// Grid approximation of `d_{C¹}` together with a rigorous bound on how far the
/// grid supremum can sit below the true supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C1Distance<T> {
    pub value: T,
    pub error_bound: T,
}

pub const DEFAULT_C1_GRID: usize = 1 << 16;

/// `sup_x d(T₁x, T₂x) + ‖T₁′ − T₂′‖∞` sampled on `grid` uniform points.
///
/// Both summands are Lipschitz: the first with constant `‖T₁′ − T₂′‖∞`, the
/// second with constant `‖T₁″‖∞ + ‖T₂″‖∞`. Between grid points the true
/// supremum exceeds the sampled one by at most `L·h/2`.
pub fn c1_distance<T: Real>(p1: &ExpandingMapParams<T>, p2: &ExpandingMapParams<T>, grid: usize) -> C1Distance<T> {
    let grid = grid.max(2);
    let h = T::one() / T::from_usize_lossy(grid);
    let mut sup_pos = T::zero();
    let mut sup_der = T::zero();
    for i in 0..grid {
        let x = CirclePoint::new(T::from_usize_lossy(i) * h);
        sup_pos = sup_pos.max(circle_distance(p1.eval(x).value(), p2.eval(x).value()));
        sup_der = sup_der.max((p1.deriv(x) - p2.deriv(x)).abs());
    }
    let m1 = T::from_u32(p1.degree).unwrap();
    let m2 = T::from_u32(p2.degree).unwrap();
    let lip_pos = (m1 - m2).abs() + p1.amplitude.abs() + p2.amplitude.abs();
    let lip_der = p1.max_second_derivative() + p2.max_second_derivative();
    C1Distance { value: sup_pos + sup_der, error_bound: (lip_pos + lip_der) * h / T::lit(2.0) }
}

/// Exact `d_{C¹}` for maps of equal degree.
///
/// The difference `T₁ − T₂` is then a pure sinusoid of amplitude `R/2π` with
/// `R = |a₁e^{iφ₁} − a₂e^{iφ₂}|`, and `T₁′ − T₂′` has amplitude `R`.
/// Returns `None` when degrees differ.
pub fn c1_distance_same_degree<T: Real>(p1: &ExpandingMapParams<T>, p2: &ExpandingMapParams<T>) -> Option<T> {
    if p1.degree != p2.degree {
        return None;
    }
    let re = p1.amplitude * p1.phase.cos() - p2.amplitude * p2.phase.cos();
    let im = p1.amplitude * p1.phase.sin() - p2.amplitude * p2.phase.sin();
    let r = re.hypot(im);
    let two_pi = T::lit(2.0) * T::PI();
    let half = T::lit(0.5);
    Some((r / two_pi).min(half) + r)
}

/// Closed form when available, grid otherwise.
pub fn c1_distance_fast<T: Real>(p1: &ExpandingMapParams<T>, p2: &ExpandingMapParams<T>, grid: usize) -> T {
    c1_distance_same_degree(p1, p2).unwrap_or_else(|| c1_distance(p1, p2, grid).value)
}

/// Branch monotonicity: the lift is strictly increasing, checked on a grid.
pub fn branches_increasing<T: Real>(p: &ExpandingMapParams<T>, grid: usize) -> bool {
    let h = T::one() / T::from_usize_lossy(grid);
    let mut prev = p.lift(T::zero());
    (1..=grid).all(|i| {
        let next = p.lift(T::from_usize_lossy(i) * h);
        let ok = next > prev;
        prev = next;
        ok
    }) && (0..grid).all(|i| p.deriv(CirclePoint::new(T::from_usize_lossy(i) * h)) > T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(x: f64) -> CirclePoint<f64> {
        CirclePoint::new(x)
    }

    #[test]
    fn doubling_map() {
        let p = ExpandingMapParams::<f64>::linear(2);
        assert_eq!(p.eval(pt(0.3)).value(), 0.6);
        for i in 0..10 {
            assert_eq!(p.deriv(pt(i as f64 / 10.0)), 2.0);
        }
        let p = ExpandingMapParams::new(2, 0.0, 1.3);
        assert_eq!(p.deriv(pt(0.77)), 2.0);
    }

    #[test]
    fn closed_form_extrema() {
        let p = ExpandingMapParams::new(2, 0.5_f64, 0.0);
        assert_eq!(p.min_derivative(), 1.5);
        assert!((p.max_second_derivative() - std::f64::consts::PI).abs() < 1e-15);
        // grid extrema agree with closed forms
        let mut lo = f64::MAX;
        let mut hi = 0.0_f64;
        for i in 0..4096 {
            let x = pt(i as f64 / 4096.0);
            lo = lo.min(p.deriv(x));
            hi = hi.max(p.second_deriv(x).abs());
        }
        assert!((lo - 1.5).abs() < 1e-12);
        assert!((hi - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn tripling_with_perturbation_hand_value() {
        let p = ExpandingMapParams::new(3, 0.2_f64, 0.0);
        let expected = 0.75 + 0.2 / (2.0 * std::f64::consts::PI);
        assert!((p.eval(pt(0.25)).value() - expected).abs() < 1e-15);
    }

    #[test]
    fn admissibility_examples() {
        let b = LambdaAstar::new(1.5, 2.0 * std::f64::consts::PI).unwrap();
        assert!(ExpandingMapParams::new(2, 0.5, 0.0).admissibility(&b).is_admissible());
        assert!(!ExpandingMapParams::new(2, 1.2, 0.0).admissibility(&b).is_admissible());
        let b = LambdaAstar::new(2.0, 5.0).unwrap();
        let r = ExpandingMapParams::new(3, 0.9_f64, 0.0).admissibility(&b);
        assert!(!r.is_admissible());
        assert_eq!(r.violations.len(), 1);
        assert!(r.violations[0].contains("A*"));
        assert!(ExpandingMapParams::new(3, 0.9_f64, 0.0).check_admissible(&b).is_err());
        assert!(ExpandingMapParams::<f64>::linear(1).check_admissible(&LambdaAstar::default()).is_err());
        assert!(LambdaAstar::new(1.0_f64, 1.0).is_err());
    }

    #[test]
    fn c1_distance_examples() {
        let d = ExpandingMapParams::<f64>::linear(2);
        let t = ExpandingMapParams::<f64>::linear(3);
        assert_eq!(c1_distance(&d, &d, DEFAULT_C1_GRID).value, 0.0);
        let dt = c1_distance(&d, &t, DEFAULT_C1_GRID);
        assert!((dt.value - 1.5).abs() <= dt.error_bound + 1e-12, "{dt:?}");
        // shrinking perturbation: distance linear in epsilon
        let mut ratios = Vec::new();
        for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
            let q = ExpandingMapParams::new(2, eps, 0.0);
            let c = c1_distance(&d, &q, DEFAULT_C1_GRID);
            ratios.push(c.value / eps);
        }
        let exact = 1.0 + 1.0 / (2.0 * std::f64::consts::PI);
        for r in ratios {
            assert!((r - exact).abs() < 1e-6, "{r}");
        }
    }

    #[test]
    fn f32_instantiation() {
        let p = ExpandingMapParams::new(2, 0.5_f32, 0.0);
        assert_eq!(p.min_derivative(), 1.5_f32);
        let v = p.eval(CirclePoint::new(0.3_f32)).value();
        let w = ExpandingMapParams::new(2, 0.5_f64, 0.0).eval(pt(0.3_f32 as f64)).value();
        assert!((v as f64 - w).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn closed_form_matches_grid(a1 in -0.9_f64..0.9, a2 in -0.9_f64..0.9, f1 in 0.0_f64..6.0, f2 in 0.0_f64..6.0) {
            let p1 = ExpandingMapParams::new(2, a1, f1);
            let p2 = ExpandingMapParams::new(2, a2, f2);
            let grid = c1_distance(&p1, &p2, 4096);
            let exact = c1_distance_same_degree(&p1, &p2).unwrap();
            prop_assert!(grid.value <= exact + 1e-12);
            prop_assert!(exact <= grid.value + grid.error_bound + 1e-12);
        }

        #[test]
        fn c1_metric_axioms(a1 in -0.5_f64..0.5, a2 in -0.5_f64..0.5, a3 in -0.5_f64..0.5,
                            m1 in 2_u32..4, m2 in 2_u32..4, m3 in 2_u32..4) {
            let p = [ExpandingMapParams::new(m1, a1, 0.3), ExpandingMapParams::new(m2, a2, 1.1), ExpandingMapParams::new(m3, a3, 2.0)];
            let g = 1024;
            let d = |i: usize, j: usize| c1_distance(&p[i], &p[j], g);
            prop_assert_eq!(d(0, 1).value, d(1, 0).value);
            let (d01, d12, d02) = (d(0, 1), d(1, 2), d(0, 2));
            let slack = d01.error_bound + d12.error_bound + d02.error_bound;
            prop_assert!(d02.value <= d01.value + d12.value + slack);
        }

        #[test]
        fn admissible_maps_have_increasing_branches(m in 2_u32..5, a in -0.99_f64..0.99, phi in 0.0_f64..6.0) {
            let p = ExpandingMapParams::new(m, a, phi);
            prop_assume!(p.admissibility(&LambdaAstar::new(1.001, 10.0).unwrap()).is_admissible());
            prop_assert!(branches_increasing(&p, 2048));
            // the lift advances by exactly m over one turn
            prop_assert!((p.lift(1.0) - p.lift(0.0) - m as f64).abs() < 1e-12);
        }
    }
}
