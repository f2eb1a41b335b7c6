//! Named deterministic RNG streams.
//!
//! Every consumer of randomness in a simulation run draws from its own
//! stream, keyed by `(seed, label)`. Changing how one consumer uses its
//! stream (or disabling it) leaves every other stream's sequence intact,
//! so ablations stay comparable draw-for-draw.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Per-round channel magnitude draws.
pub const STREAM_CHANNEL: &str = "channel";
/// Descent-step client sampling (the selection of `D^(t)`).
pub const STREAM_DESCENT_SAMPLING: &str = "descent-sampling";
/// Ascent-step client sampling (the selection of `U^(t)`).
pub const STREAM_ASCENT_SAMPLING: &str = "ascent-sampling";
/// Synthetic dataset generation.
pub const STREAM_DATA: &str = "data";
/// Per-client descent mini-batch shuffling.
pub const STREAM_BATCH: &str = "batch";
/// Ascent-loss batch draws.
pub const STREAM_ASCENT_BATCH: &str = "ascent-batch";
/// Receiver noise in the AirComp aggregation.
pub const STREAM_NOISE: &str = "noise";

/// Returns the deterministic random stream for `(seed, stream_label)`.
///
/// The seed selects the ChaCha key and the label selects the (64-bit)
/// stream counter, so streams with the same seed but different labels
/// never overlap.
pub fn seeded_rng(seed: u64, stream_label: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a64(stream_label.as_bytes()));
    rng
}

// FNV-1a: stable across platforms and toolchains, unlike `DefaultHasher`.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
