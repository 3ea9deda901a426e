//! Shared inputs for the benchmarks in `benches/`.

use varjack::RandomSource;

/// A word of `len` letters drawn uniformly from `0..m`.
pub fn random_word(rng: &mut RandomSource, len: usize, m: usize) -> Vec<u32> {
    (0..len).map(|_| rng.below(m) as u32).collect()
}
