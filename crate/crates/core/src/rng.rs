//! Counter-based random streams.
//!
//! Every stream is a ChaCha8 keystream keyed by a 64-bit seed and selected by a
//! 64-bit stream id (typically a pixel or trial index), so a draw depends only
//! on `(seed, stream, position)` and never on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Opens the stream `stream` of the keystream family keyed by `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives an independent seed for a named sub-computation (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
