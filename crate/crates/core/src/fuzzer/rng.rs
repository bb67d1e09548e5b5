use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent sub-streams of one campaign seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Scheduler = 1,
    Mutator = 2,
    Coin = 3,
}

pub fn stream(seed: u64, s: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s as u64);
    rng
}
