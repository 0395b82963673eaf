//! Fraction of sampled points whose `ζ_n` is within `ε` of `ζ` for every dictionary observable.

use qds_core::sampling::sup_distance_ensemble;
use qds_core::Ensemble;

use super::convergence::{exact_grid, reference_curves, sampled, Reference};
use super::{fmt, Outcome};
use crate::config::{GenericityConfig, Kind};
use crate::error::Result;
use crate::output::Table;
use crate::row;

/// `worst[i]` is member `i`'s largest sup-distance over the dictionary.
pub(crate) fn generic_fraction(worst: &[f64], epsilon: f64) -> f64 {
    worst.iter().filter(|d| **d < epsilon).count() as f64 / worst.len() as f64
}

pub fn run_genericity(c: &GenericityConfig, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(&c.name, Kind::Generic, seed);
    let scheme = c.scheme.build()?;
    let refs = reference_curves(&c.scheme, &c.dictionary, &c.ulam, Reference::Srb)?;
    let ensemble = Ensemble::lebesgue(c.ensemble, seed)?;
    let mut table = Table::new(out.stem("genericity"), &["n", "epsilon", "fraction", "ensemble", "seed"]);
    let dictionary = c.dictionary.iter().map(|f| f.label()).collect::<Vec<_>>().join(" ");
    let mut at_check = None;
    let check_n = *c.n_values.last().unwrap();
    for &n in &c.n_values {
        let grid = exact_grid(n, c.t_grid, &refs);
        let dists = sup_distance_ensemble(&ensemble, &scheme, n, &c.dictionary, &sampled(&refs, &grid), &grid)?;
        let worst: Vec<f64> = dists.iter().map(|d| d.iter().fold(0.0_f64, |a, b| a.max(*b))).collect();
        for &eps in &c.epsilons {
            table.push(row![n, eps, generic_fraction(&worst, eps), ensemble.len(), seed]);
        }
        if n == check_n {
            at_check = Some(generic_fraction(&worst, c.epsilon));
        }
    }
    out.tables.push(table);
    let fraction = at_check.expect("check level is one of n_values");
    out.check(
        None,
        "epsilon-generic fraction at largest n",
        fraction >= c.min_fraction,
        format!("{} >= {} at n = {check_n}, epsilon = {}, dictionary [{dictionary}]", fmt(fraction), fmt(c.min_fraction), fmt(c.epsilon)),
    );
    Ok(out)
}
