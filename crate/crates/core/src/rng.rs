//! Seeded, stream-splittable randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A (seed, stream) pair naming an independent ChaCha keystream.
///
/// Handles are plain values; derive child streams with [`RngHandle::split`]
/// so each parallel task owns its own sequence regardless of thread layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngHandle {
    pub seed: u64,
    pub stream: u64,
}

impl RngHandle {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Child handle for sub-task `index` of this stream.
    pub fn split(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15))),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Stream tags used by the protocols so their draws never overlap.
pub mod streams {
    pub const NETWORK_BENCHMARKING: u64 = 0x4e42;
    pub const TWO_QUBIT_RB: u64 = 0x5251;
    pub const TOMOGRAPHY: u64 = 0x544f;
    pub const MONTE_CARLO: u64 = 0x4d43;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
