//! Ulam stationary densities: exact cases, refinement, and a long-orbit histogram.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qds_core::ulam::{expectation_of_masses, measure_expectation};
use qds_core::{srb_density, CirclePoint, ExpandingMapParams, InvariantDensity, Observable};

use super::{fmt, Outcome};
use crate::config::{Kind, UlamConfig};
use crate::error::Result;
use crate::output::Table;
use crate::row;

fn max_uniform_deviation(d: &InvariantDensity<f64>) -> f64 {
    let n = d.bins() as f64;
    d.bin_masses.iter().fold(0.0, |a, m| a.max((m * n - 1.0).abs()))
}

/// Histogram expectation over consecutive batches of one orbit.
pub(crate) fn orbit_batches(p: &ExpandingMapParams<f64>, f: &Observable<f64>, x0: f64, length: usize, batches: usize, bins: usize) -> Vec<f64> {
    let per = length / batches;
    let mut x = CirclePoint::new(x0);
    let mut hist = vec![0_u64; bins];
    (0..batches)
        .map(|_| {
            hist.iter_mut().for_each(|h| *h = 0);
            for _ in 0..per {
                x = p.eval(x);
                hist[((x.value() * bins as f64) as usize).min(bins - 1)] += 1;
            }
            let masses: Vec<f64> = hist.iter().map(|h| *h as f64 / per as f64).collect();
            expectation_of_masses(&masses, f).value
        })
        .collect()
}

pub fn run_ulam(c: &UlamConfig, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(&c.name, Kind::Ulam, seed);

    let mut linear = Table::new(out.stem("ulam_linear"), &["degree", "ulam_N", "residual", "max_uniform_deviation", "iterations"]);
    for &m in &c.linear_degrees {
        let d = srb_density(&ExpandingMapParams::linear(m), c.bins, c.subsamples, c.residual_tolerance)?;
        let dev = max_uniform_deviation(&d);
        linear.push(row![m as usize, c.bins, d.residual, dev, d.iterations]);
        out.check(
            None,
            &format!("degree {m}: uniform stationary density"),
            d.residual <= c.residual_tolerance && dev <= c.residual_tolerance,
            format!("residual {}, deviation {} <= {}", fmt(d.residual), fmt(dev), fmt(c.residual_tolerance)),
        );
    }
    out.tables.push(linear);

    let p = c.nonlinear;
    let f = &c.observable;
    let coarse = srb_density(&p, c.coarse_bins, c.subsamples, c.residual_tolerance)?;
    let fine = srb_density(&p, c.bins, c.subsamples, c.residual_tolerance)?;
    let (e_coarse, e_fine) = (measure_expectation(&coarse, f).value, measure_expectation(&fine, f).value);
    let refinement = (e_coarse - e_fine).abs();
    let mut table = Table::new(out.stem("ulam_refinement"), &["ulam_N", "expectation", "residual", "iterations"]);
    table.push(row![c.coarse_bins, e_coarse, coarse.residual, coarse.iterations]);
    table.push(row![c.bins, e_fine, fine.residual, fine.iterations]);
    out.tables.push(table);
    out.check(
        None,
        &format!("{}: refinement {} to {} bins", f.label(), c.coarse_bins, c.bins),
        refinement < c.refinement_tolerance,
        format!("{} < {}", fmt(refinement), fmt(c.refinement_tolerance)),
    );

    let mut density = Table::new(out.stem("density"), &["x", "density", "ulam_N"]);
    let nf = c.bins as f64;
    for (i, m) in fine.bin_masses.iter().enumerate() {
        density.push(row![(i as f64 + 0.5) / nf, m * nf, c.bins]);
    }
    out.tables.push(density);

    let x0 = ChaCha8Rng::seed_from_u64(seed).random::<f64>();
    let batches = orbit_batches(&p, f, x0, c.orbit_length, c.batches, c.bins);
    let b = batches.len() as f64;
    let mean = batches.iter().sum::<f64>() / b;
    let var = batches.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1.0);
    let se = (var / b).sqrt();
    let sigma = (se * se + refinement * refinement).sqrt();
    let z = (mean - e_fine).abs() / sigma;
    let mut orbit = Table::new(out.stem("orbit"), &["length", "batches", "estimate", "std_error", "reference", "refinement", "z", "seed"]);
    orbit.push(row![c.batches * (c.orbit_length / c.batches), c.batches, mean, se, e_fine, refinement, z, seed]);
    out.tables.push(orbit);
    out.check(
        None,
        &format!("{}: orbit histogram agrees with Ulam density", f.label()),
        z <= c.sigmas,
        format!("|{} - {}| = {} sigma <= {}", fmt(mean), fmt(e_fine), fmt(z), fmt(c.sigmas)),
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbit_batches_of_constant_observable() {
        let p = ExpandingMapParams::new(3, 0.3, 0.1);
        let b = orbit_batches(&p, &Observable::Constant { value: 2.0 }, 0.123, 1000, 10, 64);
        assert_eq!(b.len(), 10);
        assert!(b.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }
}
