//! SRB densities along a curve and the limit functional `ζ(t) = ∫₀ᵗ μ̂_s(f) ds`.

use rayon::prelude::*;

use crate::curve::CurveSpec;
use crate::error::{usage, Result};
use crate::observable::Observable;
use crate::scalar::Real;
use crate::scheme::TriangularArrayScheme;
use crate::ulam::{
    build_ulam, expectation_of_masses, measure_expectation, srb_density, InvariantDensity, DEFAULT_BINS,
    DEFAULT_SUBSAMPLES, DEFAULT_TOLERANCE,
};
use crate::zeta::{GridPath, TGrid};

pub const DEFAULT_NODES_PER_PIECE: usize = 257;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UlamSettings<T> {
    pub bins: usize,
    pub subsamples: usize,
    pub tolerance: T,
}

impl<T: Real> Default for UlamSettings<T> {
    fn default() -> Self {
        Self { bins: DEFAULT_BINS, subsamples: DEFAULT_SUBSAMPLES, tolerance: T::lit(DEFAULT_TOLERANCE) }
    }
}

/// Densities of `γ_s` on a per-piece quadrature grid.
#[derive(Debug, Clone)]
pub struct SrbTable<T> {
    pieces: Vec<PieceTable<T>>,
    settings: UlamSettings<T>,
}

#[derive(Debug, Clone)]
struct PieceTable<T> {
    nodes: Vec<T>,
    densities: Vec<InvariantDensity<T>>,
    constant: bool,
}

impl<T: Real> SrbTable<T> {
    /// Computes densities at `nodes_per_piece` equispaced nodes on every
    /// piece; piece endpoints use the piece's own parameters, i.e. one-sided
    /// limits at jumps. Constant pieces are solved once.
    pub fn build(curve: &CurveSpec<T>, nodes_per_piece: usize, settings: UlamSettings<T>) -> Result<Self> {
        curve.validate()?;
        if nodes_per_piece < 2 {
            return usage("need at least two quadrature nodes per piece");
        }
        let mut pieces = Vec::with_capacity(curve.pieces.len());
        for piece in &curve.pieces {
            let m = nodes_per_piece - 1;
            let len = piece.end - piece.start;
            let nodes: Vec<T> = (0..=m)
                .map(|j| if j == m { piece.end } else { piece.start + len * T::from_usize_lossy(j) / T::from_usize_lossy(m) })
                .collect();
            let constant = piece.is_constant();
            let densities = if constant {
                let d = srb_density(&piece.params_at(piece.start), settings.bins, settings.subsamples, settings.tolerance)?;
                vec![d; nodes.len()]
            } else {
                nodes
                    .par_iter()
                    .map(|&s| srb_density(&piece.params_at(s), settings.bins, settings.subsamples, settings.tolerance))
                    .collect::<Result<Vec<_>>>()?
            };
            pieces.push(PieceTable { nodes, densities, constant });
        }
        Ok(Self { pieces, settings })
    }

    pub fn settings(&self) -> UlamSettings<T> {
        self.settings
    }

    pub fn max_residual(&self) -> T {
        self.pieces.iter().flat_map(|p| p.densities.iter()).fold(T::zero(), |a, d| a.max(d.residual))
    }

    /// `μ̂_s(f)` at every node, piece by piece.
    pub fn expectations(&self, f: &Observable<T>) -> Vec<Vec<(T, T)>> {
        self.pieces
            .iter()
            .map(|p| p.nodes.iter().zip(&p.densities).map(|(s, d)| (*s, measure_expectation(d, f).value)).collect())
            .collect()
    }

    /// `μ̂_t(f)` by linear interpolation between nodes (right-continuous at jumps).
    pub fn expectation_at(&self, f: &Observable<T>, t: T) -> T {
        let idx = self.pieces.iter().position(|p| t < *p.nodes.last().unwrap()).unwrap_or(self.pieces.len() - 1);
        let p = &self.pieces[idx];
        let e = |j: usize| measure_expectation(&p.densities[j], f).value;
        let j = p.nodes.partition_point(|s| *s <= t).clamp(1, p.nodes.len() - 1);
        let (s0, s1) = (p.nodes[j - 1], p.nodes[j]);
        let w = ((t - s0) / (s1 - s0)).max(T::zero()).min(T::one());
        e(j - 1) * (T::one() - w) + e(j) * w
    }

    /// Integrates `s ↦ μ̂_s(f)` with the composite trapezoid rule, piece by piece.
    pub fn zeta_curve(&self, f: &Observable<T>) -> ZetaCurve<T> {
        let mut t_grid = vec![T::zero()];
        let mut values = vec![T::zero()];
        let mut residuals = vec![T::zero()];
        let half = T::lit(0.5);
        for p in &self.pieces {
            let mu: Vec<T> = p.densities.iter().map(|d| measure_expectation(d, f).value).collect();
            let base = *values.last().unwrap();
            let s0 = p.nodes[0];
            let r0 = residuals.last_mut().unwrap();
            *r0 = r0.max(p.densities[0].residual);
            let mut acc = base;
            for j in 1..p.nodes.len() {
                let v = if p.constant {
                    base + (p.nodes[j] - s0) * mu[0]
                } else {
                    acc += (p.nodes[j] - p.nodes[j - 1]) * (mu[j - 1] + mu[j]) * half;
                    acc
                };
                t_grid.push(p.nodes[j]);
                values.push(v);
                residuals.push(p.densities[j].residual);
            }
        }
        ZetaCurve {
            t_grid,
            values,
            residuals,
            bins: self.settings.bins,
            nodes_per_piece: self.pieces[0].nodes.len(),
            lipschitz: f.sup_norm(),
        }
    }
}

/// Limit curve `ζ` on its quadrature nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaCurve<T> {
    pub t_grid: Vec<T>,
    pub values: Vec<T>,
    /// Power-iteration residual of the density used at each node.
    pub residuals: Vec<T>,
    pub bins: usize,
    pub nodes_per_piece: usize,
    pub lipschitz: T,
}

impl<T: Real> ZetaCurve<T> {
    /// `t ↦ c·t`, the limit when every `γ_t` shares one invariant measure.
    pub fn linear(slope: T, bins: usize) -> Self {
        Self {
            t_grid: vec![T::zero(), T::one()],
            values: vec![T::zero(), slope],
            residuals: vec![T::zero(); 2],
            bins,
            nodes_per_piece: 2,
            lipschitz: slope.abs(),
        }
    }

    /// Piecewise-linear interpolation between nodes.
    pub fn eval(&self, t: T) -> T {
        let j = self.t_grid.partition_point(|s| *s <= t).clamp(1, self.t_grid.len() - 1);
        let (s0, s1) = (self.t_grid[j - 1], self.t_grid[j]);
        let w = ((t - s0) / (s1 - s0)).max(T::zero()).min(T::one());
        self.values[j - 1] + (self.values[j] - self.values[j - 1]) * w
    }

    pub fn on_grid(&self, grid: &TGrid<T>) -> SampledCurve<T> {
        SampledCurve {
            t_grid: grid.points().to_vec(),
            values: grid.points().iter().map(|t| self.eval(*t)).collect(),
            lipschitz: self.lipschitz,
        }
    }

    /// Shifts every value; used for fault injection in tests.
    pub fn shifted(&self, delta: T) -> Self {
        let mut c = self.clone();
        for (t, v) in c.t_grid.iter().zip(c.values.iter_mut()) {
            if *t > T::zero() {
                *v += delta;
            }
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve<T> {
    pub t_grid: Vec<T>,
    pub values: Vec<T>,
    pub lipschitz: T,
}

impl<T: Real> GridPath<T> for SampledCurve<T> {
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

/// `ζ` for one observable: builds the density table and integrates.
pub fn zeta_curve<T: Real>(
    curve: &CurveSpec<T>,
    f: &Observable<T>,
    nodes_per_piece: usize,
    settings: UlamSettings<T>,
) -> Result<ZetaCurve<T>> {
    Ok(SrbTable::build(curve, nodes_per_piece, settings)?.zeta_curve(f))
}

/// `μ(f_{n,k})` for `k = 0..=n` with `μ` Lebesgue, obtained by pushing the
/// uniform bin vector through the Ulam operators of `T_{n,1}, …, T_{n,k}`.
///
/// This is the infinite-ensemble limit of the Lebesgue-sampled mean, free of
/// Monte Carlo noise, and discretized consistently with [`SrbTable`] at the
/// same `settings`.
pub fn pushforward_expectations<T: Real>(
    scheme: &TriangularArrayScheme<T>,
    n: usize,
    f: &Observable<T>,
    settings: UlamSettings<T>,
) -> Result<Vec<T>> {
    if n == 0 {
        return usage("array level n must be at least 1");
    }
    let bins = settings.bins;
    let mut u = vec![T::one() / T::from_usize_lossy(bins); bins];
    let mut out = Vec::with_capacity(n + 1);
    out.push(expectation_of_masses(&u, f).value);
    let mut cached: Option<(crate::maps::ExpandingMapParams<T>, crate::ulam::UlamOperator<T>)> = None;
    for k in 1..=n {
        let p = scheme.map_at(n, k);
        if cached.as_ref().map(|(q, _)| *q != p).unwrap_or(true) {
            cached = Some((p, build_ulam(&p, bins, settings.subsamples)?));
        }
        u = cached.as_ref().unwrap().1.apply(&u);
        out.push(expectation_of_masses(&u, f).value);
    }
    Ok(out)
}
