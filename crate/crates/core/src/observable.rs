//! Bounded Lipschitz observables on the circle.

use serde::{Deserialize, Serialize};

use crate::circle::{circle_distance, reduce_mod1, CirclePoint};
use crate::error::{usage, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable<T> {
    Constant { value: T },
    /// `cos(2πkx)`
    Cosine { harmonic: u32 },
    /// `sin(2πkx)`
    Sine { harmonic: u32 },
    /// `cos²(2πkx)`
    CosineSquared { harmonic: u32 },
    /// `1 − 4·d(x, 0)`, a tent peaked at 0 with values in `[−1, 1]`.
    Tent,
    /// Periodic piecewise-linear interpolation of values at `x = i/L`.
    Tabulated { values: Vec<T> },
    /// `Σ cᵢ·fᵢ`
    Combination { terms: Vec<(T, Observable<T>)> },
}

impl<T: Real> Observable<T> {
    pub fn cos(harmonic: u32) -> Self {
        Self::Cosine { harmonic }
    }

    pub fn tabulated(values: Vec<T>) -> Result<Self> {
        if values.len() < 2 {
            return usage("tabulated observable needs at least two values");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return usage("tabulated observable has non-finite values");
        }
        Ok(Self::Tabulated { values })
    }

    #[inline]
    pub fn eval(&self, x: CirclePoint<T>) -> T {
        self.eval_raw(x.value())
    }

    /// Evaluation at a raw coordinate already reduced to `[0, 1)`.
    #[inline]
    pub fn eval_raw(&self, x: T) -> T {
        let two_pi = T::lit(2.0) * T::PI();
        match self {
            Self::Constant { value } => *value,
            Self::Cosine { harmonic } => (two_pi * T::from_u32(*harmonic).unwrap() * x).cos(),
            Self::Sine { harmonic } => (two_pi * T::from_u32(*harmonic).unwrap() * x).sin(),
            Self::CosineSquared { harmonic } => {
                let c = (two_pi * T::from_u32(*harmonic).unwrap() * x).cos();
                c * c
            }
            Self::Tent => T::one() - T::lit(4.0) * circle_distance(x, T::zero()),
            Self::Tabulated { values } => {
                let l = values.len();
                let pos = reduce_mod1(x) * T::from_usize_lossy(l);
                let i = pos.floor().to_usize().unwrap_or(0).min(l - 1);
                let w = pos - T::from_usize_lossy(i);
                values[i] * (T::one() - w) + values[(i + 1) % l] * w
            }
            Self::Combination { terms } => terms.iter().fold(T::zero(), |acc, (c, f)| acc + *c * f.eval_raw(x)),
        }
    }

    /// Upper bound on `‖f‖∞`.
    pub fn sup_norm(&self) -> T {
        match self {
            Self::Constant { value } => value.abs(),
            Self::Cosine { .. } | Self::Sine { .. } | Self::CosineSquared { .. } | Self::Tent => T::one(),
            Self::Tabulated { values } => values.iter().fold(T::zero(), |a, v| a.max(v.abs())),
            Self::Combination { terms } => terms.iter().fold(T::zero(), |a, (c, f)| a + c.abs() * f.sup_norm()),
        }
    }

    /// Upper bound on the Lipschitz constant with respect to the circle metric.
    pub fn lipschitz_constant(&self) -> T {
        let two_pi = T::lit(2.0) * T::PI();
        match self {
            Self::Constant { .. } => T::zero(),
            Self::Cosine { harmonic } | Self::Sine { harmonic } => two_pi * T::from_u32(*harmonic).unwrap(),
            // |d/dx cos²(2πkx)| = 2πk·|sin(4πkx)|
            Self::CosineSquared { harmonic } => two_pi * T::from_u32(*harmonic).unwrap(),
            Self::Tent => T::lit(4.0),
            Self::Tabulated { values } => {
                let l = values.len();
                let max_jump = (0..l).fold(T::zero(), |a, i| a.max((values[(i + 1) % l] - values[i]).abs()));
                max_jump * T::from_usize_lossy(l)
            }
            Self::Combination { terms } => terms.iter().fold(T::zero(), |a, (c, f)| a + c.abs() * f.lipschitz_constant()),
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self {
            Self::Constant { value } => format!("const({value})"),
            Self::Cosine { harmonic } => format!("cos{harmonic}"),
            Self::Sine { harmonic } => format!("sin{harmonic}"),
            Self::CosineSquared { harmonic } => format!("cos2_{harmonic}"),
            Self::Tent => "tent".to_string(),
            Self::Tabulated { values } => format!("table{}", values.len()),
            Self::Combination { terms } => {
                terms.iter().map(|(c, f)| format!("{c}*{}", f.label())).collect::<Vec<_>>().join("+")
            }
        }
    }

    /// The default genericity dictionary: harmonics 1..=4 and the tent.
    pub fn dictionary() -> Vec<Self> {
        let mut d: Vec<Self> = (1..=4).map(Self::cos).collect();
        d.push(Self::Tent);
        d
    }
}
