//! Seeded random test instances: multilinear functions on binary or ternary
//! coordinates with random laws, and LCS functions of random-law words.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::families::{lcs_function, multilinear, MultilinearTerm, ValueTable};
use crate::model::{CoordFunction, FiniteDistribution, ProductSpace};
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    Multilinear,
    Lcs,
}

#[derive(Clone)]
pub struct RandomInstance {
    pub label: String,
    pub kind: InstanceKind,
    pub arity: u32,
    pub space: ProductSpace,
    pub f: CoordFunction,
}

impl std::fmt::Debug for RandomInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RandomInstance")
            .field("label", &self.label)
            .field("n", &self.space.n())
            .finish()
    }
}

/// A law on `0..m` with every mass at least `0.05`.
pub fn random_law(rng: &mut RandomSource, m: u32) -> Result<FiniteDistribution> {
    let w: Vec<f64> = (0..m).map(|_| 0.05 + rng.unit()).collect();
    let total: f64 = w.iter().sum();
    FiniteDistribution::new((0..m).collect(), w.iter().map(|x| x / total).collect())
}

/// Random atoms' values and up to `2n` random monomials of every order.
pub fn random_multilinear(rng: &mut RandomSource, n: usize, m: u32) -> Result<RandomInstance> {
    let coords = (0..n)
        .map(|_| random_law(rng, m))
        .collect::<Result<Vec<_>>>()?;
    let space = ProductSpace::new(coords)?;
    let values = ValueTable::new(
        (0..n)
            .map(|_| (0..m).map(|_| 4.0 * rng.unit() - 2.0).collect())
            .collect(),
    );
    let count = 1 + rng.below(2 * n);
    let mut terms = Vec::with_capacity(count + 1);
    for _ in 0..count {
        let indices: Vec<usize> = (0..n).filter(|_| rng.unit() < 0.4).collect();
        terms.push(MultilinearTerm {
            indices,
            coef: 2.0 * rng.unit() - 1.0,
        });
    }
    // always one top-order term, so high differences are exercised
    terms.push(MultilinearTerm {
        indices: (0..n).collect(),
        coef: 2.0 * rng.unit() - 1.0,
    });
    let f = multilinear(values, terms)?;
    Ok(RandomInstance {
        label: format!("multilinear_n{n}_m{m}"),
        kind: InstanceKind::Multilinear,
        arity: m,
        space,
        f,
    })
}

/// LCS of two random words of total length `n`, each letter with its own law.
pub fn random_lcs(rng: &mut RandomSource, n: usize, m: u32) -> Result<RandomInstance> {
    let split = n / 2;
    let coords = (0..n)
        .map(|_| random_law(rng, m))
        .collect::<Result<Vec<_>>>()?;
    let space = ProductSpace::new(coords)?;
    let f = lcs_function(n, split)?;
    Ok(RandomInstance {
        label: format!("lcs_{split}x{}_m{m}", n - split),
        kind: InstanceKind::Lcs,
        arity: m,
        space,
        f,
    })
}

/// `count` instances with `n` in `2..=max_n`, cycling through binary and
/// ternary multilinear and LCS-type functions.
pub fn instance_batch(seed: u64, count: usize, max_n: usize) -> Result<Vec<RandomInstance>> {
    let mut rng = RandomSource::new(seed, 0);
    (0..count)
        .map(|i| {
            let n = 2 + rng.below(max_n.max(2) - 1);
            let m = if (i / 2) % 2 == 0 { 2 } else { 3 };
            if i % 2 == 0 {
                random_multilinear(&mut rng, n, m)
            } else {
                random_lcs(&mut rng, n, m)
            }
        })
        .collect()
}
