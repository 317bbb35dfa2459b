//! Seeding helpers. All randomness flows from a master seed split into
//! independent streams, so results do not depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "MSDYN_SEED";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `master` and a path of stream indices.
pub fn derive_seed(master: u64, stream: &[u64]) -> u64 {
    stream.iter().fold(splitmix64(master), |acc, &s| splitmix64(acc ^ splitmix64(s.wrapping_add(1))))
}

pub fn rng_for(master: u64, stream: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, stream))
}

pub fn seed_from_env() -> Option<u64> {
    std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok())
}

/// Flag, then config, then `MSDYN_SEED`, then [`DEFAULT_SEED`].
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> u64 {
    flag.or(config).or_else(seed_from_env).unwrap_or(DEFAULT_SEED)
}
