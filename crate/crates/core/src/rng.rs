//! Reproducible random streams.
//!
//! Every stochastic routine draws from `ChaCha8` keyed by a 64-bit master
//! seed, with one ChaCha stream per replica (or per batch of trials). Streams
//! are independent of each other and of the order in which they are consumed,
//! so results do not depend on how work is scheduled across threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed used by the command line when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED_AB15_0001;

pub fn stream(master_seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng
}
