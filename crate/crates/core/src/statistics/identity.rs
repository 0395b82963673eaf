//! The centered four-point expansion on finite probability spaces.
//!
//! Writing `⟨·⟩` for expectation and `t̄ = t − ⟨t⟩`,
//!
//! ```text
//! ⟨t̄1 t̄2 t̄3 t̄4⟩ = {⟨1234⟩ − ⟨123⟩⟨4⟩}
//!               − ⟨3⟩{⟨124⟩ − ⟨12⟩⟨4⟩} − ⟨2⟩{⟨134⟩ − ⟨13⟩⟨4⟩} + ⟨2⟩⟨3⟩{⟨14⟩ − ⟨1⟩⟨4⟩}
//!               − ⟨1⟩{⟨234⟩ − ⟨23⟩⟨4⟩} + ⟨1⟩⟨3⟩{⟨24⟩ − ⟨2⟩⟨4⟩} + ⟨1⟩⟨2⟩{⟨34⟩ − ⟨3⟩⟨4⟩}
//! ```
//!
//! Every brace is a raw correlation difference of the kind bounded by the
//! decay of correlations. The routines are generic so the identity can be
//! checked in exact rational arithmetic as well as in floating point.

use num_traits::{FromPrimitive, Num, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{usage, Result};

fn expect<T: Num + Clone>(weights: &[T], f: impl Fn(usize) -> T) -> T {
    weights.iter().enumerate().fold(T::zero(), |acc, (i, w)| acc + w.clone() * f(i))
}

fn validate<T: Num + Signed + Clone + PartialOrd + FromPrimitive>(weights: &[T], values: &[Vec<T>; 4]) -> Result<()> {
    let k = weights.len();
    if k < 2 {
        return usage(format!("probability space needs at least 2 atoms, got {k}"));
    }
    if values.iter().any(|v| v.len() != k) {
        return usage("each of the four functions needs one value per atom");
    }
    if weights.iter().any(|w| w.is_negative()) {
        return usage("weights must be nonnegative");
    }
    let sum = weights.iter().fold(T::zero(), |a, w| a + w.clone());
    let tol = T::from_f64(1e-12).unwrap_or_else(T::zero);
    if (sum - T::one()).abs() > tol {
        return usage("weights must sum to 1");
    }
    Ok(())
}

/// `⟨t̄1 t̄2 t̄3 t̄4⟩` computed from centered values.
pub fn four_point_direct<T: Num + Clone>(weights: &[T], values: &[Vec<T>; 4]) -> T {
    let means: Vec<T> = values.iter().map(|v| expect(weights, |i| v[i].clone())).collect();
    expect(weights, |i| {
        (0..4).fold(T::one(), |acc, j| acc * (values[j][i].clone() - means[j].clone()))
    })
}

/// The seven-term expansion of `⟨t̄1 t̄2 t̄3 t̄4⟩` in raw moments.
pub fn four_point_expansion<T: Num + Clone>(weights: &[T], values: &[Vec<T>; 4]) -> T {
    let m = |idx: &[usize]| {
        expect(weights, |i| idx.iter().fold(T::one(), |acc, &j| acc * values[j][i].clone()))
    };
    let (e1, e2, e3, e4) = (m(&[0]), m(&[1]), m(&[2]), m(&[3]));
    let brace = |with4: &[usize], without: &[usize]| m(with4) - m(without) * e4.clone();

    brace(&[0, 1, 2, 3], &[0, 1, 2]) - e3.clone() * brace(&[0, 1, 3], &[0, 1]) - e2.clone() * brace(&[0, 2, 3], &[0, 2])
        + e2.clone() * e3.clone() * brace(&[0, 3], &[0])
        - e1.clone() * brace(&[1, 2, 3], &[1, 2])
        + e1.clone() * e3.clone() * brace(&[1, 3], &[1])
        + e1 * e2 * brace(&[2, 3], &[2])
}

/// `|direct − expansion|` on the space `(weights, values)`.
pub fn four_point_expansion_check<T>(weights: &[T], values: &[Vec<T>; 4]) -> Result<T>
where
    T: Num + Signed + Clone + PartialOrd + FromPrimitive,
{
    validate(weights, values)?;
    Ok((four_point_direct(weights, values) - four_point_expansion(weights, values)).abs())
}

/// A random `K`-atom space: Dirichlet(1) weights and values uniform on `[-1, 1]`.
pub fn random_probability_space(k: usize, seed: u64) -> Result<(Vec<f64>, [Vec<f64>; 4])> {
    if k < 2 {
        return usage(format!("probability space needs at least 2 atoms, got {k}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    let values = std::array::from_fn(|_| (0..k).map(|_| rng.random_range(-1.0..1.0)).collect());
    Ok((weights, values))
}
