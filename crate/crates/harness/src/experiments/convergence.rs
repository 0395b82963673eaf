//! Sup-distance of `ζ_n(x, ·)` to the reference `ζ` over a Lebesgue ensemble.

use rayon::prelude::*;
use serde::Serialize;

use qds_core::curve::loglog_slope;
use qds_core::sampling::{sup_distance_ensemble, Sampler};
use qds_core::statistics::ensemble_means;
use qds_core::ulam::expectation_of_masses;
use qds_core::{pushforward_expectations, srb_density, Ensemble, Observable, SrbTable, TGrid, TriangularArrayScheme, ZetaCurve};

use super::{fmt, quantile, sorted, Outcome};
use crate::config::{ConvergenceConfig, InvarianceConfig, Kind, RateConfig, SchemeConfig, UlamChoice};
use crate::error::Result;
use crate::output::Table;
use crate::row;

/// How the limit curve `ζ` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// `∫₀ᵗ μ̂_s(f) ds` from Ulam densities of the frozen maps.
    Srb,
    /// `t·m(f)`, valid when every map preserves Lebesgue measure.
    Lebesgue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub q05: f64,
    pub median: f64,
    pub q95: f64,
    pub ensemble: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub observable: String,
    pub rows: Vec<ConvergenceRow>,
    /// `(x, n, sup-distance)` for deterministic starting points.
    pub probes: Vec<(f64, usize, f64)>,
}

const LEBESGUE_QUADRATURE_BINS: usize = 4096;

pub(crate) fn lebesgue_mean(f: &Observable<f64>) -> f64 {
    let n = LEBESGUE_QUADRATURE_BINS;
    expectation_of_masses(&vec![1.0 / n as f64; n], f).value
}

pub fn reference_curves(
    scheme: &SchemeConfig,
    observables: &[Observable<f64>],
    ulam: &UlamChoice,
    reference: Reference,
) -> Result<Vec<ZetaCurve<f64>>> {
    match reference {
        Reference::Lebesgue => Ok(observables.iter().map(|f| ZetaCurve::linear(lebesgue_mean(f), ulam.bins)).collect()),
        Reference::Srb => {
            let table = SrbTable::build(&scheme.curve.build()?, ulam.nodes, ulam.settings())?;
            Ok(observables.iter().map(|f| table.zeta_curve(f)).collect())
        }
    }
}

pub(crate) fn srb_table(stem: String, z: &ZetaCurve<f64>) -> Table {
    let mut t = Table::new(stem, &["t", "zeta", "ulam_N", "residual"]);
    for ((s, v), r) in z.t_grid.iter().zip(&z.values).zip(&z.residuals) {
        t.push(row![*s, *v, z.bins, *r]);
    }
    t
}

/// Every breakpoint of `ζ_n` and of the references, so the sup over the grid is exact.
pub(crate) fn exact_grid(n: usize, intervals: usize, refs: &[ZetaCurve<f64>]) -> TGrid<f64> {
    let mut g = TGrid::uniform(n).merged(TGrid::<f64>::uniform(intervals).points());
    for r in refs {
        g = g.merged(&r.t_grid);
    }
    g
}

pub(crate) fn sampled(refs: &[ZetaCurve<f64>], grid: &TGrid<f64>) -> Vec<Vec<f64>> {
    refs.iter().map(|r| r.on_grid(grid).values).collect()
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

pub fn run_convergence(c: &ConvergenceConfig, kind: Kind, seed: u64) -> Result<(Vec<ConvergenceReport>, Outcome)> {
    let mut out = Outcome::new(&c.name, kind, seed);
    let scheme = c.scheme.build()?;
    let reference = if kind == Kind::Common { Reference::Lebesgue } else { Reference::Srb };
    let mut refs = reference_curves(&c.scheme, &c.observables, &c.ulam, reference)?;
    if c.reference_shift != 0.0 {
        refs = refs.iter().map(|r| r.shifted(c.reference_shift)).collect();
    }
    for (f, z) in c.observables.iter().zip(&refs) {
        out.tables.push(srb_table(out.stem(&format!("srb_{}", f.label())), z));
    }

    let ensemble = Ensemble::lebesgue(c.ensemble, seed)?;
    let probes = if c.probe_points.is_empty() {
        None
    } else {
        let w = 1.0 / c.probe_points.len() as f64;
        let mut weights = vec![w; c.probe_points.len()];
        let head: f64 = weights[1..].iter().sum();
        weights[0] = 1.0 - head;
        Some(Ensemble::new(Sampler::discrete(c.probe_points.clone(), weights)?, c.probe_points.len(), seed)?)
    };

    let mut reports: Vec<ConvergenceReport> =
        c.observables.iter().map(|f| ConvergenceReport { observable: f.label(), rows: Vec::new(), probes: Vec::new() }).collect();
    for &n in &c.n_values {
        let grid = exact_grid(n, c.t_grid, &refs);
        let values = sampled(&refs, &grid);
        let dists = sup_distance_ensemble(&ensemble, &scheme, n, &c.observables, &values, &grid)?;
        for (i, report) in reports.iter_mut().enumerate() {
            let s = sorted(dists.iter().map(|d| d[i]).collect());
            report.rows.push(ConvergenceRow {
                n,
                q05: quantile(&s, 0.05),
                median: quantile(&s, 0.5),
                q95: quantile(&s, 0.95),
                ensemble: s.len(),
                seed,
            });
        }
        if let Some(p) = &probes {
            let pd = sup_distance_ensemble(p, &scheme, n, &c.observables, &values, &grid)?;
            for (x, d) in c.probe_points.iter().zip(&pd) {
                for (report, v) in reports.iter_mut().zip(d) {
                    report.probes.push((*x, n, *v));
                }
            }
        }
    }

    let mut probe_table = Table::new(out.stem("probes"), &["x", "n", "observable", "sup_distance"]);
    for report in &reports {
        let mut t = Table::new(out.stem(&format!("convergence_{}", report.observable)), &["n", "q05", "median", "q95", "ensemble", "seed"]);
        for r in &report.rows {
            t.push(row![r.n, r.q05, r.median, r.q95, r.ensemble, r.seed]);
        }
        out.tables.push(t);
        for (x, n, d) in &report.probes {
            probe_table.push(row![*x, *n, report.observable.clone(), *d]);
        }

        let medians: Vec<f64> = report.rows.iter().map(|r| r.median).collect();
        let listed = medians.iter().map(|m| fmt(*m)).collect::<Vec<_>>().join(", ");
        let label = &report.observable;
        out.check(None, &format!("{label}: median sup-distance strictly decreasing"), strictly_decreasing(&medians), format!("medians [{listed}]"));
        let last = *medians.last().unwrap();
        out.check(
            None,
            &format!("{label}: median at largest n below tolerance"),
            last < c.final_tolerance,
            format!("{} < {}", fmt(last), fmt(c.final_tolerance)),
        );
        if let Some(min_ratio) = c.min_ratio {
            let ratio = medians[0] / last;
            out.check(
                None,
                &format!("{label}: median ratio first/last n"),
                ratio >= min_ratio,
                format!("{} >= {}", fmt(ratio), fmt(min_ratio)),
            );
        }
    }
    if !probe_table.rows.is_empty() {
        out.tables.push(probe_table);
    }

    if let Some(rate) = &c.rate {
        rate_check(&mut out, rate, &scheme, &ensemble, &c.ulam)?;
    }
    if let Some(inv) = &c.invariance {
        invariance_check(&mut out, inv, &scheme, &c.observables, &c.n_values, seed)?;
    }
    Ok((reports, out))
}

/// `sup_t |m(f_{n,⌊nt⌋}) − μ̂_t(f)|` from Ulam pushforwards, fitted against `n^{−η′}`.
fn rate_check(
    out: &mut Outcome,
    rate: &RateConfig,
    scheme: &TriangularArrayScheme<f64>,
    ensemble: &Ensemble,
    ulam: &UlamChoice,
) -> Result<()> {
    let f = &rate.observable;
    let settings = ulam.settings();
    let mut table = Table::new(out.stem("rate"), &["n", "sup_error", "argmax_t", "mc_sup_error", "ensemble", "seed"]);
    let mut sups = Vec::new();
    for &n in &rate.n_values {
        let ks: Vec<usize> = (0..=rate.t_samples).map(|j| n * j / rate.t_samples).collect();
        let exact = ks
            .par_iter()
            .map(|&k| {
                let p = scheme.curve().params_at(k as f64 / n as f64);
                srb_density(&p, settings.bins, settings.subsamples, settings.tolerance)
                    .map(|d| qds_core::ulam::measure_expectation(&d, f).value)
            })
            .collect::<qds_core::Result<Vec<f64>>>()?;
        let push = pushforward_expectations(scheme, n, f, settings)?;
        let (sup, argmax) = ks.iter().zip(&exact).fold((0.0_f64, 0.0), |(s, a), (&k, e)| {
            let d = (push[k] - e).abs();
            if d > s {
                (d, k as f64 / n as f64)
            } else {
                (s, a)
            }
        });
        let mc = ensemble_means(f, scheme, n, &ks, ensemble)?;
        let mc_sup = mc.iter().zip(&exact).fold(0.0_f64, |s, (m, e)| s.max((m.mean - e).abs()));
        table.push(row![n, sup, argmax, mc_sup, ensemble.len(), ensemble.seed()]);
        sups.push(sup);
    }
    out.tables.push(table);
    let eta = scheme.curve().holder_exponent;
    let target = -rate.eta_fraction * eta;
    let ns: Vec<f64> = rate.n_values.iter().map(|n| *n as f64).collect();
    let slope = loglog_slope(&ns, &sups);
    let pass = slope.is_some_and(|s| s <= target + rate.slope_tolerance);
    let detail = match slope {
        Some(s) => format!("slope {} <= {} + {}", fmt(s), fmt(target), fmt(rate.slope_tolerance)),
        None => "slope undefined (non-positive errors)".to_string(),
    };
    out.check(rate.criterion, &format!("{}: pushforward rate", f.label()), pass, detail);
    Ok(())
}

/// `μ(f_{n,⌊nt⌋}) = m(f)` within Monte Carlo error when every map preserves Lebesgue measure.
fn invariance_check(
    out: &mut Outcome,
    inv: &InvarianceConfig,
    scheme: &TriangularArrayScheme<f64>,
    observables: &[Observable<f64>],
    n_values: &[usize],
    seed: u64,
) -> Result<()> {
    let ensemble = Ensemble::lebesgue(inv.ensemble, seed)?;
    let mut table = Table::new(out.stem("invariance"), &["n", "t", "observable", "estimate", "std_error", "samples", "target", "seed"]);
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for f in observables {
        let target = lebesgue_mean(f);
        for &n in n_values {
            let ks: Vec<usize> = inv.t_values.iter().map(|t| ((n as f64 * t).floor() as usize).min(n)).collect();
            let est = ensemble_means(f, scheme, n, &ks, &ensemble)?;
            for (t, e) in inv.t_values.iter().zip(&est) {
                pass &= e.consistent_with(target, inv.sigmas);
                worst = worst.max((e.mean - target).abs() / e.std_error.max(1e-300));
                table.push(row![n, *t, f.label(), e.mean, e.std_error, e.samples, target, seed]);
            }
        }
    }
    out.tables.push(table);
    out.check(None, "mean of f_{n,[nt]} equals the invariant mean", pass, format!("worst deviation {} sigma, limit {}", fmt(worst), fmt(inv.sigmas)));
    Ok(())
}
