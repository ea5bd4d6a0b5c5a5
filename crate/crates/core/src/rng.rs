//! Counter-based random streams: every `(seed, stream)` pair names an
//! independent, reproducible sequence, so work split across streams gives the
//! same numbers regardless of how it is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
