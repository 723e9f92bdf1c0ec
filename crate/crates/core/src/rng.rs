//! Reproducible random streams.
//!
//! Every Monte-Carlo draw in the workspace comes from a stream keyed by
//! `(master seed, case index, particle index)`. Streams are independent of
//! scheduling, so results do not depend on how work is split across
//! threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for particle `index` of case `case` under `master` seed.
pub fn stream(master: u64, case: u64, index: u64) -> Stream {
    let mut state = master ^ case.rotate_left(32) ^ 0x6375_7276_6c61_6221;
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(index);
    rng
}

/// `(master seed, case index)` pair from which per-particle streams derive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    pub master: u64,
    pub case: u64,
}

impl StreamKey {
    pub fn new(master: u64, case: u64) -> Self {
        Self { master, case }
    }

    pub fn particle(&self, index: u64) -> Stream {
        stream(self.master, self.case, index)
    }
}
