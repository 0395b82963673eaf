//! Points of the circle `[0, 1)` with endpoints identified.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Reduce a real number to `[0, 1)`.
///
/// The fractional part is taken with round-toward-zero and then shifted into
/// range; values that land on `1.0` after the shift fold back to `0.0`.
#[inline]
pub fn reduce_mod1<T: Real>(v: T) -> T {
    let mut r = v - v.trunc();
    if r < T::zero() {
        r += T::one();
    }
    if r >= T::one() {
        r = T::zero();
    }
    r
}

/// Standard metric on the circle.
#[inline]
pub fn circle_distance<T: Real>(a: T, b: T) -> T {
    let d = reduce_mod1((a - b).abs());
    d.min(T::one() - d)
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct CirclePoint<T>(T);

impl<T: Real> CirclePoint<T> {
    pub fn new(v: T) -> Self {
        Self(reduce_mod1(v))
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }

    pub fn distance(self, other: Self) -> T {
        circle_distance(self.0, other.0)
    }
}

impl<T: Real> From<T> for CirclePoint<T> {
    fn from(v: T) -> Self {
        Self::new(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reduction_edge_cases() {
        assert_eq!(reduce_mod1(1.0_f64), 0.0);
        assert_eq!(reduce_mod1(2.25_f64), 0.25);
        assert_eq!(reduce_mod1(-0.25_f64), 0.75);
        // -1e-18 + 1 rounds to 1.0 and must fold back to 0.
        assert_eq!(reduce_mod1(-1e-18_f64), 0.0);
        assert_eq!(reduce_mod1(-1e-9_f32), 0.0);
    }

    #[test]
    fn distance_wraps() {
        assert!((circle_distance(0.95_f64, 0.05) - 0.1).abs() < 1e-15);
        assert_eq!(circle_distance(0.0_f64, 0.5), 0.5);
    }

    proptest! {
        #[test]
        fn reduced_values_in_unit_interval(v in -1e6_f64..1e6) {
            let r = reduce_mod1(v);
            prop_assert!((0.0..1.0).contains(&r));
            let p = CirclePoint::new(v);
            prop_assert!(p.value() >= 0.0 && p.value() < 1.0);
        }

        #[test]
        fn distance_is_symmetric_and_bounded(a in 0.0_f64..1.0, b in 0.0_f64..1.0) {
            let d = circle_distance(a, b);
            prop_assert_eq!(d, circle_distance(b, a));
            prop_assert!((0.0..=0.5).contains(&d));
        }
    }
}
