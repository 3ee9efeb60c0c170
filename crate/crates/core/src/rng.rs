//! Seed discipline.
//!
//! Every independent unit of Monte Carlo work (one grid point of a sweep, one
//! series of a figure) draws from its own ChaCha8 stream: the key is derived
//! from the master seed and the stream id is the unit's index. Streams never
//! overlap, and growing the number of draws in one unit only appends to that
//! unit's stream, so earlier draws are never perturbed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream `index` of `master`.
pub fn stream(master: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Seed for replication `i` of a run seeded with `master`.
pub fn replication_seed(master: u64, i: u64) -> u64 {
    master ^ i
}
