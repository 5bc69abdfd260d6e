//! Counter-based random streams keyed by `(seed, replicate, task, purpose)`.
//!
//! Every stream is ChaCha8 with its 256-bit key set to four little-endian
//! `u64` words `[seed, k0, k1, k2]` (missing words are zero) and the block
//! counter starting at zero. A draw is therefore a pure function of its key
//! and its index in the stream, independent of execution order, and any
//! ChaCha8 implementation reproduces the raw stream.
//!
//! Gaussian variates come from `rand_distr::StandardNormal` (ziggurat).

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct KeyedRng(ChaCha8Rng);

impl KeyedRng {
    /// # Panics
    /// If `key` has more than three words.
    pub fn new(seed: u64, key: &[u64]) -> Self {
        assert!(key.len() <= 3, "at most three key words");
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&seed.to_le_bytes());
        for (i, k) in key.iter().enumerate() {
            bytes[8 * (i + 1)..8 * (i + 2)].copy_from_slice(&k.to_le_bytes());
        }
        Self(ChaCha8Rng::from_seed(bytes))
    }
}

impl RngCore for KeyedRng {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// Stream purposes, used as the last key word.
pub(crate) mod purpose {
    pub const MODE: u64 = 1;
    pub const TASK_PARAMS: u64 = 2;
    pub const TRAIN: u64 = 3;
    pub const TEST: u64 = 4;
    pub const LTL_PARAMS: u64 = 5;
    pub const LTL_TRAIN: u64 = 6;
    pub const LTL_TEST: u64 = 7;
    pub const SPLIT: u64 = 8;
    pub const FOLDS: u64 = 9;
    pub const RADEMACHER: u64 = 10;
    pub const ENV_TRAIN: u64 = 11;
    pub const ENV_TEST: u64 = 12;
    pub const SYNTH: u64 = 13;
}
