//! Seedable, portable random streams.
//!
//! Every stochastic step in the crate draws from a ChaCha8 generator keyed by
//! the experiment seed. Independent consumers (a network layer at a given
//! step, a DSMC cell at a given step, a sample within a batch) get their own
//! stream selected by a tag path, so results never depend on call order or
//! thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator family recorded in run metadata.
pub const RNG_FAMILY: &str = "ChaCha8 (rand_chacha 0.9), stream = splitmix64 fold of tag path";

pub type RngStream = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Root stream for `seed`.
pub fn root(seed: u64) -> RngStream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream keyed by `seed` and selected by `tags`. Distinct tag paths give
/// statistically independent streams.
pub fn derive(seed: u64, tags: &[u64]) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stream = tags
        .iter()
        .fold(0x6A09_E667_F3BC_C908_u64, |acc, &t| splitmix64(acc ^ splitmix64(t)));
    rng.set_stream(stream);
    rng
}

/// Domain tags so that different subsystems sharing a seed never collide.
pub mod tag {
    pub const KERNEL: u64 = 1;
    pub const DSMC_INIT: u64 = 2;
    pub const DSMC_CELL: u64 = 3;
    pub const NET_INIT: u64 = 4;
    pub const NET_KITI: u64 = 5;
    pub const DATASET: u64 = 6;
    pub const SHUFFLE: u64 = 7;
    pub const A_EDITION: u64 = 8;
}
