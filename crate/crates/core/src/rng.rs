use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent streams derived from one seed.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Stream {
    Permutation = 0,
    Insertion = 1,
    Queries = 2,
}

pub(crate) fn seeded(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
