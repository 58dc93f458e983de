//! Counter-based random streams.
//!
//! A stream is a ChaCha8 generator keyed by `(seed, stream id)`. Monte Carlo
//! loops split their samples into fixed-size chunks and give chunk `c` the
//! stream `c` under a base seed drawn from the caller's generator, so the
//! result does not depend on how chunks are scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Samples per parallel work unit. Part of the reproducibility contract:
/// changing it changes every Monte Carlo result.
pub const CHUNK: usize = 512;

pub fn stream(seed: u64, id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Draws a fresh base seed for a family of substreams.
pub fn fork<R: RngCore + ?Sized>(rng: &mut R) -> u64 {
    rng.next_u64()
}

/// Stream ids used by the intervention simulator and the service.
pub mod ids {
    pub const SAMPLING: u64 = 1;
    pub const EVALUATION: u64 = 2;
    pub const NORMALIZATION: u64 = 3;

    pub fn query(index: usize) -> u64 {
        0x100 + index as u64
    }

    pub fn planning(stage: usize) -> u64 {
        0x1_0000 + stage as u64
    }

    pub fn attendance(stage: usize) -> u64 {
        0x2_0000 + stage as u64
    }
}

pub(crate) fn chunks(samples: usize) -> impl Iterator<Item = (usize, usize)> + Clone {
    let count = samples.div_ceil(CHUNK);
    (0..count).map(move |c| (c, CHUNK.min(samples - c * CHUNK)))
}
