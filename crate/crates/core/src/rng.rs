//! Seeded random streams.
//!
//! Every random decision in the pipeline draws from a ChaCha stream keyed by
//! the user seed and a fixed stream label, so one seed reproduces a whole
//! experiment and adding randomness in one stage never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Labeled substreams fanned out from a single experiment seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Split,
    Folds,
    Shuffle,
    Smote,
    Grid,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Split => 1,
            Stream::Folds => 2,
            Stream::Shuffle => 3,
            Stream::Smote => 4,
            Stream::Grid => 5,
        }
    }
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which.id());
    rng
}

/// A stream further keyed by a sub-index, e.g. one per class.
pub fn substream(seed: u64, which: Stream, index: u64) -> ChaCha8Rng {
    stream(mix(seed, index), which)
}

/// Derives a child seed; used to hand distinct seeds to nested stages.
pub fn mix(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ salt.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
