//! Reproducible random streams.
//!
//! Every Monte-Carlo trial draws from its own ChaCha8 stream keyed by
//! `(master seed, grid point, trial index)`, so results do not depend on how
//! trials are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RandomStream = ChaCha8Rng;

/// A stream seeded from a single integer, for one-off constructions.
pub fn stream(seed: u64) -> RandomStream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The stream for one trial at one grid point.
pub fn trial_stream(master_seed: u64, point_key: u64, trial: u64) -> RandomStream {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&point_key.to_le_bytes());
    key[16..24].copy_from_slice(b"kfrl-mc\0");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}
