//! Reproducible, per-replica random streams.
//!
//! A stream is identified by `(seed, substream)`. Each purpose (path noise,
//! killing threshold, initial state) uses its own ChaCha key derived from the
//! seed, and the replica index selects the ChaCha stream, so replicas and
//! purposes never share draws.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub substream: u64,
}

#[derive(Debug, Clone, Copy)]
enum Purpose {
    Path = 0x9a7e,
    Killing = 0x4b11,
    Initial = 0x1717,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, substream: u64) -> Self {
        Self { seed, substream }
    }

    fn derive(&self, purpose: Purpose) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut s = self.seed ^ ((purpose as u64) << 48);
        for chunk in key.chunks_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.substream);
        rng
    }

    /// Brownian increments.
    pub fn path_rng(&self) -> ChaCha8Rng {
        self.derive(Purpose::Path)
    }

    /// The unit-exponential killing threshold, independent of the path noise.
    pub fn killing_rng(&self) -> ChaCha8Rng {
        self.derive(Purpose::Killing)
    }

    /// Draws of the initial state.
    pub fn initial_rng(&self) -> ChaCha8Rng {
        self.derive(Purpose::Initial)
    }
}
