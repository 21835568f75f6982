use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used everywhere a seed is accepted. ChaCha output is stable
/// across platforms and crate releases, which the determinism contracts
/// rely on.
pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
