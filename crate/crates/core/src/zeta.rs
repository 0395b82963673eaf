//! The interpolated ergodic functional
//!
//! `ζ_n(x, t) = n⁻¹ [Σ_{k<⌊nt⌋} f_{n,k}(x) + (nt − ⌊nt⌋)·f_{n,⌊nt⌋}(x)]`
//!
//! which is exactly piecewise linear in `t` with breakpoints at `k/n`.

use crate::circle::CirclePoint;
use crate::error::{usage, QdsError, Result};
use crate::observable::Observable;
use crate::orbit::OrbitStream;
use crate::scalar::Real;
use crate::scheme::TriangularArrayScheme;

/// Ascending evaluation times in `[0, 1]` containing both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct TGrid<T>(Vec<T>);

pub const DEFAULT_GRID_INTERVALS: usize = 512;
pub const BREAKPOINT_LIMIT: usize = 4096;

impl<T: Real> TGrid<T> {
    pub fn new(points: Vec<T>) -> Result<Self> {
        if points.len() < 2 || points[0] != T::zero() || *points.last().unwrap() != T::one() {
            return usage("t-grid must start at 0 and end at 1");
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) {
            return usage("t-grid must be strictly ascending");
        }
        Ok(Self(points))
    }

    pub fn uniform(intervals: usize) -> Self {
        let m = intervals.max(1);
        let mut v: Vec<T> = (0..=m).map(|i| T::from_usize_lossy(i) / T::from_usize_lossy(m)).collect();
        v[m] = T::one();
        Self(v)
    }

    /// Uniform 513-point grid, plus every breakpoint `k/n` when `n ≤ 4096`.
    pub fn default_for(n: usize) -> Self {
        let base = Self::uniform(DEFAULT_GRID_INTERVALS);
        if n == 0 || n > BREAKPOINT_LIMIT {
            return base;
        }
        let breaks: Vec<T> = (0..=n).map(|k| T::from_usize_lossy(k) / T::from_usize_lossy(n)).collect();
        base.merged(&breaks)
    }

    /// Union with extra points in `[0, 1]`.
    pub fn merged(&self, extra: &[T]) -> Self {
        let mut v: Vec<T> = self.0.iter().chain(extra.iter()).copied().filter(|t| *t >= T::zero() && *t <= T::one()).collect();
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
        v.dedup();
        Self(v)
    }

    pub fn points(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_spacing(&self) -> T {
        self.0.windows(2).fold(T::zero(), |a, w| a.max(w[1] - w[0]))
    }
}

/// Something sampled on a t-grid with a known Lipschitz constant in `t`.
pub trait GridPath<T> {
    fn t_grid(&self) -> &[T];
    fn values(&self) -> &[T];
    fn lipschitz(&self) -> T;
}

/// `ζ_n(x, ·)` (or a centered/averaged variant) sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicPath<T> {
    pub n: usize,
    pub t_grid: Vec<T>,
    pub values: Vec<T>,
    /// Lipschitz constant in `t`; `‖f‖∞` for `ζ_n`.
    pub lipschitz: T,
}

impl<T: Real> GridPath<T> for ErgodicPath<T> {
    fn t_grid(&self) -> &[T] {
        &self.t_grid
    }
    fn values(&self) -> &[T] {
        &self.values
    }
    fn lipschitz(&self) -> T {
        self.lipschitz
    }
}

/// Incremental evaluator of `ζ_n` at sorted grid times as `f_{n,k}` values stream in.
#[derive(Debug, Clone)]
pub struct ZetaAccumulator<'g, T> {
    n: usize,
    nf: T,
    grid: &'g [T],
    next: usize,
    k: usize,
    partial: T,
    out: Vec<T>,
}

impl<'g, T: Real> ZetaAccumulator<'g, T> {
    pub fn new(n: usize, grid: &'g [T]) -> Self {
        Self { n, nf: T::from_usize_lossy(n), grid, next: 0, k: 0, partial: T::zero(), out: Vec::with_capacity(grid.len()) }
    }

    /// Feed `f_{n,k}` for the next `k`.
    #[inline]
    pub fn push(&mut self, fk: T) {
        while self.next < self.grid.len() {
            let s = self.nf * self.grid[self.next];
            let kk = s.floor().to_usize().unwrap_or(0).min(self.n);
            if kk != self.k {
                break;
            }
            let frac = s - T::from_usize_lossy(kk);
            let v = if frac > T::zero() { self.partial + frac * fk } else { self.partial };
            self.out.push(v / self.nf);
            self.next += 1;
        }
        self.partial += fk;
        self.k += 1;
    }

    pub fn is_complete(&self) -> bool {
        self.next == self.grid.len()
    }

    /// The number of `f_{n,k}` values needed: grid times never look past `k = n`.
    pub fn needed(&self) -> usize {
        self.n + 1
    }

    pub fn finish(self) -> Vec<T> {
        debug_assert!(self.is_complete());
        self.out
    }
}

/// `ζ_n` on a grid from the tabulated sequence `f_{n,0..=n}`.
pub fn zeta_from_values<T: Real>(values: &[T], n: usize, grid: &TGrid<T>) -> Result<Vec<T>> {
    if n == 0 {
        return usage("array level n must be at least 1");
    }
    if values.len() < n + 1 {
        // the last value only enters with weight 0 at t = 1
        if values.len() < n {
            return usage(format!("need at least {n} observable values, got {}", values.len()));
        }
    }
    let mut acc = ZetaAccumulator::new(n, grid.points());
    for k in 0..=n {
        acc.push(values.get(k).copied().unwrap_or(T::zero()));
    }
    Ok(acc.finish())
}

/// `ζ_n(x, ·)` for the float orbit of `x`, streamed over `k`.
pub fn zeta_path<T: Real>(
    f: &Observable<T>,
    x: CirclePoint<T>,
    n: usize,
    scheme: &TriangularArrayScheme<T>,
    grid: &TGrid<T>,
) -> Result<ErgodicPath<T>> {
    if n == 0 {
        return usage("array level n must be at least 1");
    }
    let mut acc = ZetaAccumulator::new(n, grid.points());
    for p in OrbitStream::new(x, n, scheme) {
        acc.push(f.eval(p));
    }
    Ok(ErgodicPath { n, t_grid: grid.points().to_vec(), values: acc.finish(), lipschitz: f.sup_norm() })
}

fn check_same_grid<T: Real>(a: &[T], b: &[T]) -> Result<()> {
    if a != b {
        return Err(QdsError::GridMismatch(format!("grids of length {} and {} differ", a.len(), b.len())));
    }
    Ok(())
}

/// `ζ̄_n = ζ_n − μ(ζ_n)` given the ensemble mean on the same grid.
pub fn center_path<T: Real>(path: &ErgodicPath<T>, ensemble_mean: &ErgodicPath<T>) -> Result<ErgodicPath<T>> {
    check_same_grid(&path.t_grid, &ensemble_mean.t_grid)?;
    Ok(ErgodicPath {
        n: path.n,
        t_grid: path.t_grid.clone(),
        values: path.values.iter().zip(&ensemble_mean.values).map(|(a, b)| *a - *b).collect(),
        lipschitz: path.lipschitz + ensemble_mean.lipschitz,
    })
}

pub fn centered_zeta_path<T: Real>(
    f: &Observable<T>,
    x: CirclePoint<T>,
    n: usize,
    scheme: &TriangularArrayScheme<T>,
    grid: &TGrid<T>,
    ensemble_mean: &ErgodicPath<T>,
) -> Result<ErgodicPath<T>> {
    check_same_grid(grid.points(), &ensemble_mean.t_grid)?;
    center_path(&zeta_path(f, x, n, scheme, grid)?, ensemble_mean)
}

/// Pointwise weighted mean of paths sharing a grid.
pub fn mean_path<T: Real>(paths: &[ErgodicPath<T>], weights: &[T]) -> Result<ErgodicPath<T>> {
    if paths.is_empty() || paths.len() != weights.len() {
        return usage("need one weight per path and at least one path");
    }
    let first = &paths[0];
    let mut values = vec![T::zero(); first.values.len()];
    for (p, w) in paths.iter().zip(weights) {
        check_same_grid(&first.t_grid, &p.t_grid)?;
        for (v, x) in values.iter_mut().zip(&p.values) {
            *v += *w * *x;
        }
    }
    let lipschitz = paths.iter().fold(T::zero(), |a, p| a.max(p.lipschitz));
    Ok(ErgodicPath { n: first.n, t_grid: first.t_grid.clone(), values, lipschitz })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupDistance<T> {
    /// Maximum of `|a − b|` over the grid.
    pub value: T,
    pub argmax_t: T,
    /// The true supremum over `[0, 1]` exceeds `value` by at most this much.
    pub interpolation_bound: T,
}

pub fn sup_distance<T: Real, A: GridPath<T>, B: GridPath<T>>(a: &A, b: &B) -> Result<SupDistance<T>> {
    check_same_grid(a.t_grid(), b.t_grid())?;
    let mut value = T::zero();
    let mut argmax_t = T::zero();
    for ((t, x), y) in a.t_grid().iter().zip(a.values()).zip(b.values()) {
        let d = (*x - *y).abs();
        if d > value {
            value = d;
            argmax_t = *t;
        }
    }
    let h = a.t_grid().windows(2).fold(T::zero(), |m, w| m.max(w[1] - w[0]));
    Ok(SupDistance { value, argmax_t, interpolation_bound: (a.lipschitz() + b.lipschitz()) * h / T::lit(2.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{CurveSpec, PowerLaw};
    use crate::maps::ExpandingMapParams;
    use proptest::prelude::*;

    fn doubling() -> TriangularArrayScheme<f64> {
        TriangularArrayScheme::canonical(CurveSpec::constant(ExpandingMapParams::linear(2)))
    }

    fn ramp() -> TriangularArrayScheme<f64> {
        TriangularArrayScheme::canonical(CurveSpec::power_law(2, PowerLaw::linear(0.0, 0.5)).unwrap())
    }

    /// Brute-force ∫₀ᵗ f_{⌊ns⌋} ds by midpoint sums on a fine s-grid.
    fn brute_force_zeta(values: &[f64], n: usize, t: f64, cells: usize) -> f64 {
        let h = t / cells as f64;
        (0..cells)
            .map(|i| {
                let s = (i as f64 + 0.5) * h;
                values[((n as f64 * s).floor() as usize).min(n)] * h
            })
            .sum()
    }

    #[test]
    fn grid_construction() {
        let g = TGrid::<f64>::default_for(10);
        assert_eq!(g.points()[0], 0.0);
        assert_eq!(*g.points().last().unwrap(), 1.0);
        assert!(g.points().contains(&0.3));
        assert_eq!(TGrid::<f64>::default_for(100_000).len(), 513);
        assert_eq!(TGrid::<f64>::default_for(512).len(), 513);
        assert!(TGrid::new(vec![0.0, 0.5]).is_err());
        assert!(TGrid::new(vec![0.0, 0.6, 0.5, 1.0]).is_err());
    }

    #[test]
    fn level_one_is_linear_in_t() {
        let grid = TGrid::uniform(8);
        for x in [0.0, 0.17, 0.5, 0.93] {
            let p = zeta_path(&Observable::Tent, CirclePoint::new(x), 1, &ramp(), &grid).unwrap();
            let fx = Observable::<f64>::Tent.eval_raw(x);
            for (t, v) in grid.points().iter().zip(&p.values) {
                assert!((v - t * fx).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn fixed_point_gives_identity_path() {
        let grid = TGrid::default_for(37);
        for n in [1, 37, 1000] {
            let p = zeta_path(&Observable::cos(1), CirclePoint::new(0.0), n, &doubling(), &grid).unwrap();
            for (t, v) in grid.points().iter().zip(&p.values) {
                assert!((v - t).abs() < 1e-12, "n={n} t={t} v={v}");
            }
        }
    }

    #[test]
    fn tabulated_sequence_value() {
        let values = [1.0, 2.0, 3.0, 4.0, 5.0];
        let grid = TGrid::new(vec![0.0, 0.625, 1.0]).unwrap();
        let z = zeta_from_values(&values, 4, &grid).unwrap();
        let oracle = brute_force_zeta(&values, 4, 0.625, 1 << 16);
        // a cell straddling a breakpoint misassigns at most h·|jump|
        let h = 0.625 / 65536.0;
        assert!((oracle - 1.125).abs() < 2.0 * h);
        assert!((z[1] - oracle).abs() < 2.0 * h);
        assert!((z[1] - 1.125).abs() < 1e-15);
        assert_eq!(z[0], 0.0);
        assert!((z[2] - 2.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_case_equals_birkhoff_average() {
        let scheme = TriangularArrayScheme::canonical(CurveSpec::constant(ExpandingMapParams::new(3, 0.4, 0.7)));
        let grid = TGrid::uniform(4);
        let n = 500;
        let p = zeta_path(&Observable::cos(2), CirclePoint::new(0.31), n, &scheme, &grid).unwrap();
        let map = ExpandingMapParams::new(3, 0.4, 0.7);
        let mut x = CirclePoint::new(0.31);
        let mut sum = 0.0;
        for _ in 0..n {
            sum += Observable::cos(2).eval(x);
            x = map.eval(x);
        }
        assert_eq!(p.values[4], sum / n as f64);
    }

    #[test]
    fn centered_examples() {
        let grid = TGrid::uniform(10);
        let f = Observable::tabulated(vec![1.0, 3.0]).unwrap();
        // x1 = 0 gives f = 1, x2 = 0.5 gives f = 3
        let p1 = zeta_path(&f, CirclePoint::new(0.0), 1, &ramp(), &grid).unwrap();
        let p2 = zeta_path(&f, CirclePoint::new(0.5), 1, &ramp(), &grid).unwrap();
        let mean = mean_path(&[p1.clone(), p2], &[0.5, 0.5]).unwrap();
        let c = centered_zeta_path(&f, CirclePoint::new(0.0), 1, &ramp(), &grid, &mean).unwrap();
        for (t, v) in grid.points().iter().zip(&c.values) {
            assert!((v + t).abs() < 1e-15);
        }
        // constant f centers to zero
        let k = Observable::Constant { value: 4.0 };
        let pk = zeta_path(&k, CirclePoint::new(0.2), 7, &ramp(), &grid).unwrap();
        let ck = center_path(&pk, &pk).unwrap();
        assert!(ck.values.iter().all(|v| *v == 0.0));
        let other = TGrid::uniform(5);
        assert!(matches!(centered_zeta_path(&k, CirclePoint::new(0.2), 7, &ramp(), &other, &pk), Err(QdsError::GridMismatch(_))));
    }

    #[test]
    fn sup_distance_examples() {
        let grid = vec![0.0_f64, 0.5, 1.0];
        let a = ErgodicPath { n: 2, t_grid: grid.clone(), values: vec![0.0, 0.5, 1.0], lipschitz: 1.0 };
        let b = ErgodicPath { n: 2, t_grid: grid.clone(), values: vec![0.0, 0.2, 0.9], lipschitz: 1.0 };
        let d = sup_distance(&a, &b).unwrap();
        assert!((d.value - 0.3).abs() < 1e-15);
        assert_eq!(d.argmax_t, 0.5);
        assert_eq!(d.interpolation_bound, 0.5);
        assert_eq!(sup_distance(&a, &a).unwrap().value, 0.0);
        let g = TGrid::uniform(16);
        let one = zeta_path(&Observable::Constant { value: 1.0 }, CirclePoint::new(0.4), 1, &ramp(), &g).unwrap();
        let zero = ErgodicPath { n: 1, t_grid: g.points().to_vec(), values: vec![0.0; 17], lipschitz: 0.0 };
        let d = sup_distance(&one, &zero).unwrap();
        assert_eq!(d.value, 1.0);
        assert_eq!(d.argmax_t, 1.0);
        let short = ErgodicPath { n: 1, t_grid: vec![0.0, 1.0], values: vec![0.0, 0.0], lipschitz: 0.0 };
        assert!(sup_distance(&one, &short).is_err());
    }

    #[test]
    fn f32_paths() {
        let scheme = TriangularArrayScheme::canonical(CurveSpec::<f32>::constant(ExpandingMapParams::linear(2)));
        let p = zeta_path(&Observable::cos(1), CirclePoint::new(0.0_f32), 64, &scheme, &TGrid::uniform(8)).unwrap();
        assert!((p.values[8] - 1.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn path_bounded_by_t_sup_norm(x in 0.0_f64..1.0, n in 1_usize..300) {
            let grid = TGrid::default_for(n);
            let f = Observable::Combination { terms: vec![(0.7, Observable::cos(3)), (0.3, Observable::Tent)] };
            let p = zeta_path(&f, CirclePoint::new(x), n, &ramp(), &grid).unwrap();
            prop_assert_eq!(p.values[0], 0.0);
            for (t, v) in grid.points().iter().zip(&p.values) {
                prop_assert!(v.abs() <= t * f.sup_norm() + 1e-12);
            }
            for w in grid.points().windows(2).zip(p.values.windows(2)) {
                let (ts, vs) = w;
                prop_assert!((vs[1] - vs[0]).abs() <= f.sup_norm() * (ts[1] - ts[0]) + 1e-12);
            }
        }

        #[test]
        fn refinement_keeps_existing_values(x in 0.0_f64..1.0, n in 1_usize..200) {
            let coarse = TGrid::uniform(16);
            let fine = TGrid::default_for(n).merged(coarse.points());
            let pc = zeta_path(&Observable::cos(1), CirclePoint::new(x), n, &ramp(), &coarse).unwrap();
            let pf = zeta_path(&Observable::cos(1), CirclePoint::new(x), n, &ramp(), &fine).unwrap();
            for (t, v) in coarse.points().iter().zip(&pc.values) {
                let idx = fine.points().iter().position(|s| s == t).unwrap();
                prop_assert_eq!(pf.values[idx], *v);
            }
        }

        #[test]
        fn linear_in_observable(x in 0.0_f64..1.0, n in 1_usize..200, alpha in -3.0_f64..3.0, beta in -3.0_f64..3.0) {
            let grid = TGrid::uniform(32);
            let f = Observable::cos(2);
            let g = Observable::Tent;
            let h = Observable::Combination { terms: vec![(alpha, f.clone()), (beta, g.clone())] };
            let pf = zeta_path(&f, CirclePoint::new(x), n, &ramp(), &grid).unwrap();
            let pg = zeta_path(&g, CirclePoint::new(x), n, &ramp(), &grid).unwrap();
            let ph = zeta_path(&h, CirclePoint::new(x), n, &ramp(), &grid).unwrap();
            for i in 0..grid.len() {
                prop_assert!((ph.values[i] - (alpha * pf.values[i] + beta * pg.values[i])).abs() < 1e-12);
            }
        }
    }
}
