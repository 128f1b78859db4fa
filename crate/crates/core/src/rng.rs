//! Reproducible random streams.
//!
//! Every sample path draws from its own ChaCha stream: the 64-bit master seed
//! selects the key and the path index selects the stream (ChaCha's 64-bit
//! nonce). Streams for different indices never overlap, so an ensemble gives
//! the same result whatever order or thread its members run on.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream used for regime paths.
pub type PathRng = ChaCha8Rng;

/// Stream `index` under `master_seed`.
pub fn path_rng(master_seed: u64, index: u64) -> PathRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
