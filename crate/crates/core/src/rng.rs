//! Counter-based random streams.
//!
//! A master seed and a domain path are hashed into a ChaCha8 key; replicate
//! `i` of that domain reads ChaCha stream `i`. Any replicate can therefore
//! be regenerated in isolation, and the assignment of replicates to worker
//! threads has no effect on the numbers drawn.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Domain tag for calibration (null) simulations.
pub const CALIBRATION: u64 = 0xCA11_B4A7;
/// Domain tag for evaluation simulations; the model index is appended.
pub const EVALUATION: u64 = 0xE7A1_0A7E;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamSeed {
    key: [u8; 32],
}

impl StreamSeed {
    pub fn new(master: u64, domain: &[u64]) -> Self {
        let mut state = master;
        for &d in domain {
            state = splitmix64(&mut state) ^ d;
        }
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Self { key }
    }

    /// Generator for replicate `index`.
    pub fn replicate(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }
}

/// Runs `f` for replicates `0..count` on the ambient rayon pool and returns
/// the results in replicate order.
pub fn map_replicates<T, F>(stream: &StreamSeed, count: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> Result<T> + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.replicate(i);
            f(i, &mut rng).map_err(|e| Error::Replicate {
                replicate: i,
                source: Box::new(e),
            })
        })
        .collect()
}
