//! Seeding.
//!
//! All randomness comes from ChaCha8 (a counter-based stream cipher generator,
//! bit-identical on every platform). A 64-bit seed selects the key and a stream
//! id selects one of 2^64 independent streams under that key, so each consumer
//! (stop-time draw, each agent, the learner) gets its own stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type FlipRng = ChaCha8Rng;

pub const STREAM_STOP_TIME: u64 = 1;
pub const STREAM_LEARNER: u64 = 2;
pub const STREAM_OPPONENT_DRAW: u64 = 3;
/// Agent `i` draws from stream `STREAM_AGENT_BASE + i`.
pub const STREAM_AGENT_BASE: u64 = 1 << 32;

pub fn stream_rng(seed: u64, stream: u64) -> FlipRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer; derives child seeds (per game, per sweep cell).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
