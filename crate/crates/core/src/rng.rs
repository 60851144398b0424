//! Seeded random streams.
//!
//! Sampling functions never share a mutable generator: each takes a seed
//! and a stream index, so parallel work partitions seeds without
//! coordination.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for `(seed, stream)`. Same pair, same bit stream.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a tag into a seed (splitmix64 finalizer) to derive child seeds.
pub fn derive(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
