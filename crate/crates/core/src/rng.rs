//! Reproducible random streams.
//!
//! Every random draw in an experiment comes from a ChaCha8 generator keyed by
//! the master seed and a stream index, so results do not depend on how work
//! is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name recorded in output manifests.
pub const GENERATOR_NAME: &str = "ChaCha8 (rand_chacha 0.9), seed_from_u64(seed), set_stream(stream)";

/// Stream-index offsets separating the different consumers of one seed.
pub mod domain {
    pub const GRAPH: u64 = 0;
    pub const REFERENCE: u64 = 1 << 40;
    pub const TORUS_MC: u64 = 2 << 40;
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
