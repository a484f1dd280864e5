//! Counter-based random substreams.
//!
//! Every stochastic task (a pixel, a Monte Carlo sample, a frequency point)
//! draws from its own ChaCha8 stream selected by `(master seed, purpose,
//! task index)`. Results therefore do not depend on how rayon schedules the
//! tasks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// What a substream is used for. Different purposes of the same task never
/// share random numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    Counts,
    Noise,
}

impl Purpose {
    fn salt(self) -> u64 {
        match self {
            Purpose::Counts => 0x436f_756e_7473_0001,
            Purpose::Noise => 0x4e6f_6973_6500_0002,
        }
    }
}

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Hierarchical seed derivation rooted at a 64-bit master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedSequence {
    key: u64,
}

impl SeedSequence {
    pub fn new(master: u64) -> Self {
        Self { key: master }
    }

    /// Independent child sequence for sub-task `index` (e.g. one frequency
    /// point of a sweep).
    pub fn child(&self, index: u64) -> Self {
        Self {
            key: splitmix64(splitmix64(self.key) ^ splitmix64(index.wrapping_add(0xA5A5_5A5A))),
        }
    }

    /// ChaCha8 generator for `task` with the given purpose.
    pub fn stream(&self, purpose: Purpose, task: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.key ^ purpose.salt()));
        rng.set_stream(task);
        rng
    }
}
