//! Deterministic random streams.
//!
//! Every random decision in the crate draws from a [`SeededRng`], which is
//! ChaCha8 keyed through `SeedableRng::seed_from_u64`. The stream depends
//! only on the seed, so runs reproduce bit-for-bit across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An independent stream under the same seed. Stream 0 is [`seeded_rng`].
pub fn seeded_stream(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
