//! The four-point expansion on random finite probability spaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qds_core::statistics::{four_point_expansion_check, random_probability_space};

use super::{fmt, Outcome};
use crate::config::{IdentityConfig, Kind};
use crate::error::Result;
use crate::output::Table;
use crate::row;

pub fn run_identity(c: &IdentityConfig, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(&c.name, Kind::Identity, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Table::new(out.stem("spaces"), &["space", "atoms", "discrepancy", "seed"]);
    let mut worst: f64 = 0.0;
    for i in 0..c.spaces {
        let k = rng.random_range(2..=c.max_atoms);
        let space_seed = rng.random::<u64>();
        let (weights, values) = random_probability_space(k, space_seed)?;
        let d = four_point_expansion_check(&weights, &values)?;
        worst = worst.max(d);
        table.push(row![i, k, d, space_seed]);
    }
    out.tables.push(table);
    out.check(
        None,
        "four-point expansion discrepancy",
        worst <= c.tolerance,
        format!("max {} <= {} over {} spaces", fmt(worst), fmt(c.tolerance), c.spaces),
    );
    Ok(out)
}
