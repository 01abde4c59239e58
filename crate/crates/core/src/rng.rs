//! Counter-based splitting of one master seed into independent streams.
//!
//! A stream is ChaCha8 keyed by the master seed with the 64-bit ChaCha stream
//! number set to `(domain << 40) | index`. `domain` names the consumer (a CLI
//! subcommand, a test); `index` is the shard or chunk counter. Work is always
//! chunked by a fixed size and chunk `c` draws from stream `c`, so the random
//! numbers a symbol sees never depend on how chunks are spread over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Bits of the stream number reserved for the chunk index.
pub const INDEX_BITS: u32 = 40;

pub fn stream_id(domain: u64, index: u64) -> u64 {
    debug_assert!(index < 1 << INDEX_BITS, "chunk index {index} overflows");
    (domain << INDEX_BITS) | index
}

pub fn stream_rng(master_seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id(domain, index));
    rng
}
