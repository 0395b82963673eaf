//! Fourth moments of the centered `ζ_n` and the `Φ^{1/2}` integral bound.

use qds_core::statistics::{fourth_moment_series, no_systematic_growth, phi_half_integral_bound_check};
use qds_core::Ensemble;

use super::{fmt, Outcome};
use crate::config::{Kind, MomentsConfig};
use crate::error::Result;
use crate::output::Table;
use crate::row;

pub fn run_moments(c: &MomentsConfig, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(&c.name, Kind::Moments, seed);
    let scheme = c.scheme.build()?;
    let ensemble = Ensemble::lebesgue(c.ensemble, seed)?;
    for &t in &c.t_values {
        let rows = fourth_moment_series(&c.observable, &scheme, t, &c.n_values, &ensemble)?;
        let mut table = Table::new(
            out.stem(&format!("moments_t{t}")),
            &["n", "m4", "std_error", "n_log2_scaled", "scaled_std_error", "samples", "seed"],
        );
        for r in &rows {
            table.push(row![r.n, r.m4, r.std_error, r.n_log2_scaled, r.scaled_std_error, r.samples, r.seed]);
        }
        out.tables.push(table);
        let scaled = rows.iter().map(|r| format!("{}±{}", fmt(r.n_log2_scaled), fmt(r.scaled_std_error))).collect::<Vec<_>>();
        out.check(
            None,
            &format!("t = {t}: n (log n)^2 m4 shows no systematic growth"),
            no_systematic_growth(&rows),
            format!("[{}]", scaled.join(", ")),
        );
    }

    let mut table = Table::new(out.stem("phi"), &["n", "lhs", "rhs", "pass", "ratio", "envelope"]);
    let mut failing = Vec::new();
    for &n in &c.phi_check_n {
        let r = phi_half_integral_bound_check(n)?;
        if !r.pass {
            failing.push(format!("n = {n}: {} > {}", fmt(r.lhs), fmt(r.rhs)));
        }
        table.push(row![n, r.lhs, r.rhs, r.pass, r.ratio, r.envelope]);
    }
    out.tables.push(table);
    let detail = if failing.is_empty() { "holds at every n".to_string() } else { failing.join("; ") };
    out.check(None, "phi half integral bound", failing.is_empty(), detail);
    Ok(out)
}
