//! Seeded randomness. Every stochastic routine in the crate draws from [`Rng64`].

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// ChaCha with 8 rounds: fast, portable and reproducible across platforms for a given seed.
pub type Rng64 = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent child seeds derived from a master seed, one per series or worker.
pub fn child_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut master = rng_from_seed(seed);
    (0..count).map(|_| master.next_u64()).collect()
}

/// A seed taken from the OS, for commands run without `--seed`.
pub fn entropy_seed() -> u64 {
    ChaCha8Rng::from_entropy().next_u64()
}
