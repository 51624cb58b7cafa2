//! Seeded random streams.
//!
//! Every replication draws from independent ChaCha streams keyed by
//! `(base seed, replication id, purpose)`, so results do not depend on
//! execution order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// What a stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Environment = 0,
    Policy = 1,
}

pub fn stream(base_seed: u64, replication: u64, purpose: StreamPurpose) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream((replication << 1) | purpose as u64);
    rng
}
