//! Seeded synthetic network time series: preferential attachment growth, bipartite
//! concentration and community decay.

mod ba;
mod bipartite;
mod community;

pub use ba::{gen_ba, BAParams};
pub use bipartite::{gen_bipartite, BipartiteParams};
pub use community::{community_of, gen_community_decay, CommunityDecayParams};

use crate::error::Result;
use crate::graph::NetworkTimeSeries;
use crate::rng::child_seeds;

/// Generates `count` series, each from its own child seed of `seed`.
pub fn gen_many<F>(count: usize, seed: u64, mut one: F) -> Result<Vec<NetworkTimeSeries>>
where
    F: FnMut(u64) -> Result<NetworkTimeSeries>,
{
    child_seeds(seed, count).into_iter().map(&mut one).collect()
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(crate::Error::param(format!("{name} must lie in [0, 1], got {p}")))
    }
}
