use serde::{Deserialize, Serialize};

use crate::curve::CurveSpec;
use crate::error::Result;
use crate::maps::{ExpandingMapParams, LambdaAstar};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ArrayMode<T> {
    /// `T_{n,k} = γ_{k/n}`.
    Canonical,
    /// `T_{n,k} = γ_{k/n}` with amplitude shifted by `scale·n^{−η}·cos(2πkϕ)`,
    /// `ϕ` the golden ratio conjugate.
    Perturbed { scale: T },
}

/// A triangular array `{T_{n,k}}` built from a curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct TriangularArrayScheme<T> {
    curve: CurveSpec<T>,
    mode: ArrayMode<T>,
}

const GOLDEN_CONJUGATE: f64 = 0.618_033_988_749_894_8;

impl<T: Real> TriangularArrayScheme<T> {
    pub fn canonical(curve: CurveSpec<T>) -> Self {
        Self { curve, mode: ArrayMode::Canonical }
    }

    pub fn perturbed(curve: CurveSpec<T>, scale: T) -> Result<Self> {
        if !(scale >= T::zero()) {
            return crate::error::config("perturbation scale must be nonnegative");
        }
        Ok(Self { curve, mode: ArrayMode::Perturbed { scale } })
    }

    pub fn new(curve: CurveSpec<T>, mode: ArrayMode<T>) -> Result<Self> {
        match mode {
            ArrayMode::Canonical => Ok(Self::canonical(curve)),
            ArrayMode::Perturbed { scale } => Self::perturbed(curve, scale),
        }
    }

    pub fn curve(&self) -> &CurveSpec<T> {
        &self.curve
    }

    pub fn mode(&self) -> ArrayMode<T> {
        self.mode
    }

    /// Validates the curve and every map the array can produce.
    pub fn validate(&self, bounds: &LambdaAstar<T>) -> Result<()> {
        self.curve.validate()?;
        let slack = match self.mode {
            ArrayMode::Canonical => T::zero(),
            ArrayMode::Perturbed { scale } => scale,
        };
        self.curve.check_admissible(bounds, slack)
    }

    /// `T_{n,k}` for `0 ≤ k ≤ n`.
    #[inline]
    pub fn map_at(&self, n: usize, k: usize) -> ExpandingMapParams<T> {
        let t = T::from_usize_lossy(k) / T::from_usize_lossy(n);
        let mut p = self.curve.params_at(t);
        if let ArrayMode::Perturbed { scale } = self.mode {
            let nf = T::from_usize_lossy(n);
            let phase = (k as f64 * GOLDEN_CONJUGATE).fract();
            let wobble = T::lit((2.0 * std::f64::consts::PI * phase).cos());
            p.amplitude += scale * nf.powf(-self.curve.holder_exponent) * wobble;
        }
        p
    }

    /// True when every `T_{n,k}` is the same map.
    pub fn is_degenerate(&self) -> bool {
        matches!(self.mode, ArrayMode::Canonical) && self.curve.is_constant()
    }
}
