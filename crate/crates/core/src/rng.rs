//! The single random generator used by every randomized routine.
//!
//! All sampling goes through `ChaCha8Rng` seeded from a `u64`, which gives
//! identical streams on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
