//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator whose key is
//! derived from `(seed, StreamTag)` and whose 64-bit stream id is a path or
//! block index. A given `(seed, tag, index)` therefore always yields the same
//! numbers no matter which worker thread consumes it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of samples drawn from one stream when generating marginal samples.
pub const BLOCK: usize = 1024;

/// One tag per sampling operation so that operations never share streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamTag {
    FbmPath = 1,
    FbmMarginal = 2,
    StableIncrement = 3,
    LevyPath = 4,
    GaussianIncrement = 5,
    KilledPath = 6,
    Convergence = 7,
    Properties = 8,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for stream `index` of operation `tag` under `seed`.
pub fn stream_rng(seed: u64, tag: StreamTag, index: u64) -> ChaCha8Rng {
    let mut state = seed ^ (tag as u64).rotate_left(32);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Mixes extra coordinates into a seed, e.g. `(seed, n_paths, repeat)`.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    let mut state = seed;
    let mut out = splitmix64(&mut state);
    for &p in parts {
        state ^= p.wrapping_mul(0xD6E8_FEB8_6659_FD93);
        out = splitmix64(&mut state);
    }
    out
}
