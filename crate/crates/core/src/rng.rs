//! Seeded, stream-addressable randomness.
//!
//! Every parallel task owns a [`RandomSource`] whose stream id is the task
//! index, so scheduling never changes which numbers a task sees.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Configuration, FiniteDistribution, ProductSpace};

#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform in `0..n`.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    #[inline]
    pub fn draw(&mut self, dist: &FiniteDistribution) -> u32 {
        if dist.len() == 1 {
            return dist.atoms()[0];
        }
        dist.quantile(self.unit())
    }

    /// Fills `out` with i.i.d. draws from `dist`.
    pub fn fill(&mut self, dist: &FiniteDistribution, out: &mut [u32]) {
        for v in out {
            *v = self.draw(dist);
        }
    }

    /// First `k` entries of a uniformly random permutation of `0..n`.
    pub fn partial_permutation(&mut self, n: usize, k: usize, scratch: &mut Vec<usize>) {
        scratch.clear();
        scratch.extend(0..n);
        for i in 0..k.min(n) {
            let j = i + self.below(n - i);
            scratch.swap(i, j);
        }
        scratch.truncate(k);
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Draws every coordinate independently by inverse CDF.
pub fn draw_config(space: &ProductSpace, rng: &mut RandomSource) -> Configuration {
    Configuration::new(draw_values(space, rng))
}

pub(crate) fn draw_values(space: &ProductSpace, rng: &mut RandomSource) -> Vec<u32> {
    space.coords().iter().map(|d| rng.draw(d)).collect()
}

pub(crate) fn draw_into(space: &ProductSpace, rng: &mut RandomSource, out: &mut [u32]) {
    for (v, d) in out.iter_mut().zip(space.coords()) {
        *v = rng.draw(d);
    }
}
