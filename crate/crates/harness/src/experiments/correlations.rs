//! Two-point correlation decay between times `k1` and `k1 + g`.

use qds_core::spectral::spectral_correlation_estimates;
use qds_core::statistics::{correlation_decay, decay_fit, DecayOutcome};
use qds_core::{Ensemble, EnsembleEstimate};

use super::{fmt, Outcome};
use crate::config::{CorrConfig, Kind};
use crate::error::Result;
use crate::output::Table;
use crate::row;

fn table(stem: String, estimates: &[(usize, EnsembleEstimate)]) -> Table {
    let mut t = Table::new(stem, &["gap", "estimate", "std_error", "samples", "seed"]);
    for (g, e) in estimates {
        t.push(row![*g, e.mean, e.std_error, e.samples, e.seed]);
    }
    t
}

fn describe(outcome: &DecayOutcome) -> String {
    match outcome {
        DecayOutcome::Fit(f) => format!(
            "D = {}, theta = {}, residual rms = {}{} over {} gaps",
            fmt(f.d),
            fmt(f.theta),
            fmt(f.residual_rms),
            if f.large_residual { " (large)" } else { "" },
            f.gaps.len()
        ),
        DecayOutcome::Inconclusive { significant } => format!("inconclusive: {significant} significant gaps"),
    }
}

/// Monte Carlo estimates are reported; the gate uses the truncated Fourier transfer operator.
pub fn run_correlations(c: &CorrConfig, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(&c.name, Kind::Corr, seed);
    let scheme = c.scheme.build()?;
    let gaps: Vec<usize> = (1..=c.max_gap).collect();

    let ensemble = Ensemble::lebesgue(c.ensemble, seed)?;
    let mc = correlation_decay(&c.observable, &scheme, c.n, c.k1, &gaps, &ensemble)?;
    out.tables.push(table(out.stem("correlations"), &mc));
    let spectral = spectral_correlation_estimates(&c.observable, &scheme, c.n, c.k1, &gaps, c.spectral_cutoff)?;
    out.tables.push(table(out.stem("correlations_spectral"), &spectral));

    let mut fits = Table::new(out.stem("decay_fit"), &["method", "outcome", "d", "theta", "residual_rms", "fitted_gaps"]);
    for (method, est) in [("monte_carlo", &mc), ("spectral", &spectral)] {
        match decay_fit(est) {
            DecayOutcome::Fit(f) => fits.push(row![method, "fit", f.d, f.theta, f.residual_rms, f.gaps.len()]),
            DecayOutcome::Inconclusive { significant } => fits.push(row![method, "inconclusive", f64::NAN, f64::NAN, f64::NAN, significant]),
        }
    }
    out.tables.push(fits);

    let gate = decay_fit(&spectral);
    let pass = matches!(&gate, DecayOutcome::Fit(f) if f.decays());
    out.check(None, "exponential correlation decay with theta < 1", pass, format!("{}; monte carlo: {}", describe(&gate), describe(&decay_fit(&mc))));
    Ok(out)
}
