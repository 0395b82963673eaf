//! The summable rate `Φ`, its square-root integral and the envelope `Ψ`.

use serde::Serialize;

use crate::error::{usage, Result};
use crate::scalar::Real;

/// `Φ(s) = s⁻¹(log s)⁻²` for `s ≥ 2`, `2⁻¹(log 2)⁻²` below.
pub fn phi<T: Real>(s: T) -> Result<T> {
    if !(s >= T::zero()) {
        return usage(format!("phi needs s >= 0, got {s}"));
    }
    let two = T::lit(2.0);
    let s = s.max(two);
    let l = s.ln();
    Ok(T::one() / (s * l * l))
}

/// `Ψ(s) = s^{1/2} / log s`, defined for `s > 1`.
pub fn psi<T: Real>(s: T) -> T {
    s.sqrt() / s.ln()
}

/// `min(a, b) ≤ a^{1/2} b^{1/2}` for `a, b ≥ 0`; this returns the right side.
pub fn geometric_mean<T: Real>(a: T, b: T) -> T {
    a.sqrt() * b.sqrt()
}

fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: u32) -> T {
    let half = T::lit(0.5);
    let m = (a + b) * half;
    let lm = (a + m) * half;
    let rm = (m + b) * half;
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::lit(15.0) * tol {
        return left + right + delta / T::lit(15.0);
    }
    adaptive(f, a, m, fa, flm, fm, left, tol * half, depth - 1) + adaptive(f, m, b, fm, frm, fb, right, tol * half, depth - 1)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub(crate) fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> T {
    if b <= a {
        return T::zero();
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f((a + b) * T::lit(0.5));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(&f, a, b, fa, fm, fb, whole, tol, 48)
}

fn tolerance<T: Real>(scale: T) -> T {
    T::epsilon() * T::lit(64.0) * scale.max(T::one())
}

/// `∫₀ⁿ Φ(s)^{1/2} ds`, integrating the tail in `u = log s`.
pub fn phi_half_integral<T: Real>(n: T) -> Result<T> {
    if !(n >= T::zero()) {
        return usage(format!("integral upper limit must be >= 0, got {n}"));
    }
    let two = T::lit(2.0);
    let head = phi(T::zero())?.sqrt() * n.min(two);
    if n <= two {
        return Ok(head);
    }
    let half = T::lit(0.5);
    // Φ(e^u)^{1/2} e^u = e^{u/2} / u
    let tail = integrate(|u: T| (u * half).exp() / u, two.ln(), n.ln(), tolerance(n.sqrt()));
    Ok(head + tail)
}

/// `∫₀^X Φ(s) ds`; it stays below `2Φ(0) + 1/log 2`.
pub fn phi_integral<T: Real>(cutoff: T) -> Result<T> {
    if !(cutoff >= T::zero()) {
        return usage(format!("integral upper limit must be >= 0, got {cutoff}"));
    }
    let two = T::lit(2.0);
    let head = phi(T::zero())? * cutoff.min(two);
    if cutoff <= two {
        return Ok(head);
    }
    Ok(head + integrate(|u: T| (u * u).recip(), two.ln(), cutoff.ln(), tolerance(T::one())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiHalfCheck {
    pub n: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    /// `lhs / (n^{1/2} / log n)`.
    pub ratio: f64,
    /// A valid bound: `Ψ' ≥ Φ^{1/2}/4` once `log s ≥ 4`.
    pub envelope: f64,
}

/// Compares `∫₀ⁿ Φ^{1/2}` with `2Φ(0)^{1/2} + 2Ψ(n) − 2Ψ(2)`.
pub fn phi_half_integral_bound_check(n: usize) -> Result<PhiHalfCheck> {
    if n < 2 {
        return usage(format!("bound check needs n >= 2, got {n}"));
    }
    let nf = n as f64;
    let lhs = phi_half_integral(nf)?;
    let root0 = phi(0.0_f64)?.sqrt();
    let rhs = 2.0 * root0 + 2.0 * psi(nf) - 2.0 * psi(2.0);
    let knee = 4.0_f64.exp();
    let envelope = if nf <= knee { lhs } else { phi_half_integral(knee)? + 4.0 * (psi(nf) - psi(knee)) };
    Ok(PhiHalfCheck {
        n: nf,
        lhs,
        rhs,
        pass: lhs <= rhs + 1e-9 * rhs.abs(),
        ratio: lhs / (nf.sqrt() / nf.ln()),
        envelope,
    })
}

/// `∫₀¹∫₀ˢ Φ(⌊ns⌋ − ⌊nr⌋)^{1/2} dr ds`, evaluated exactly cell by cell.
pub fn moment_bound_integral(n: usize) -> Result<f64> {
    if n == 0 {
        return usage("moment bound needs n >= 1");
    }
    let nf = n as f64;
    let mut acc = 0.5 * nf * phi(0.0_f64)?.sqrt();
    for d in 1..n {
        acc += (n - d) as f64 * phi(d as f64)?.sqrt();
    }
    Ok(acc / (nf * nf))
}
