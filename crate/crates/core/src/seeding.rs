//! Deterministic, order-independent random streams.
//!
//! Every stream is a ChaCha generator keyed by the master seed and a tuple
//! of coordinates (purpose, trial, element indices...). Work can therefore be
//! split across threads in any order without changing a single draw.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// What a stream is used for; part of the key so purposes never collide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamPurpose {
    /// Frequency-recursion innovations for one `(trial, rx, tx)` entry.
    Fading = 1,
    /// Standardized K-factor draw of one environment.
    KFactor = 2,
    /// Whitened receiver noise.
    Noise = 3,
    /// Validation and self-test draws.
    Validation = 4,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for the stream addressed by `(master, purpose, coords)`.
pub fn stream_rng(master: u64, purpose: StreamPurpose, coords: &[u64]) -> ChaCha12Rng {
    let mut state = master;
    let mut key = splitmix64(&mut state) ^ purpose as u64;
    for &c in coords {
        state ^= key;
        key = splitmix64(&mut state) ^ c.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    }
    let mut seed = [0u8; 32];
    let mut s = key;
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    ChaCha12Rng::from_seed(seed)
}
