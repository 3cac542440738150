//! Keyed random streams.
//!
//! A stream is identified by `(master_seed, stream_index)`. The master seed is
//! expanded into a ChaCha8 key and the index selects the ChaCha stream, so
//! trial `i` of a campaign always sees the same numbers no matter which worker
//! runs it or in which order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

/// Domains keep the streams used for different purposes disjoint.
pub mod domain {
    pub const REFERENCE: u64 = 0x5245_4645_5245_4e43;
    pub const TRIAL: u64 = 0x5452_4941_4c00_0000;
    pub const PRIOR: u64 = 0x5052_494f_5200_0000;
    pub const PILOT: u64 = 0x5049_4c4f_5400_0000;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self { master_seed, stream_index }
    }

    /// A stream family keyed by `(master_seed, label)`, independent of `self`'s family.
    pub fn derive(&self, label: u64) -> RngStream {
        let mut s = self.master_seed ^ label.rotate_left(17);
        let mixed = splitmix64(&mut s) ^ splitmix64(&mut s).rotate_left(32);
        RngStream { master_seed: mixed, stream_index: self.stream_index }
    }

    pub fn with_index(&self, stream_index: u64) -> RngStream {
        RngStream { master_seed: self.master_seed, stream_index }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn generator(&self) -> ChaCha8Rng {
        let mut state = self.master_seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Convenience: the first `n` words of a stream.
pub fn words(stream: &RngStream, n: usize) -> Vec<u64> {
    let mut rng = stream.generator();
    (0..n).map(|_| rng.next_u64()).collect()
}
