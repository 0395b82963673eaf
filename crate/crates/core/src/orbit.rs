//! Level-`n` orbits `x_{n,k} = T_{n,k} ∘ ⋯ ∘ T_{n,1}(x)`.

use crate::circle::CirclePoint;
use crate::error::{usage, Result};
use crate::observable::Observable;
use crate::scalar::Real;
use crate::scheme::TriangularArrayScheme;

/// Streams `x_{n,0}, …, x_{n,n}` without materializing the orbit.
#[derive(Debug, Clone)]
pub struct OrbitStream<'a, T> {
    scheme: &'a TriangularArrayScheme<T>,
    n: usize,
    k: usize,
    current: CirclePoint<T>,
}

impl<'a, T: Real> OrbitStream<'a, T> {
    pub fn new(x: CirclePoint<T>, n: usize, scheme: &'a TriangularArrayScheme<T>) -> Self {
        Self { scheme, n, k: 0, current: x }
    }
}

impl<T: Real> Iterator for OrbitStream<'_, T> {
    type Item = CirclePoint<T>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.k > self.n {
            return None;
        }
        let out = self.current;
        self.k += 1;
        if self.k <= self.n {
            self.current = self.scheme.map_at(self.n, self.k).eval(self.current);
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.n + 1 - self.k.min(self.n + 1);
        (left, Some(left))
    }
}

impl<T: Real> ExactSizeIterator for OrbitStream<'_, T> {}

/// The full level-`n` orbit, `n + 1` points starting at `x`.
pub fn evolve_orbit<T: Real>(x: CirclePoint<T>, n: usize, scheme: &TriangularArrayScheme<T>) -> Result<Vec<CirclePoint<T>>> {
    if n == 0 {
        return usage("array level n must be at least 1");
    }
    scheme.curve().validate()?;
    Ok(OrbitStream::new(x, n, scheme).collect())
}

/// `f_{n,k}(x) = f(x_{n,k})` along an orbit.
pub fn observable_sequence<T: Real>(f: &Observable<T>, orbit: &[CirclePoint<T>]) -> Result<Vec<T>> {
    if orbit.is_empty() {
        return usage("orbit is empty");
    }
    Ok(orbit.iter().map(|&x| f.eval(x)).collect())
}
