//! Monte Carlo estimators.
//!
//! Sampling is split into fixed-size shards; shard `s` draws from stream `s`
//! of the configured seed, and shard outputs are concatenated in shard order
//! before any reduction. The worker count only decides how many shards run
//! at once, so results are bit-identical for any `streams`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CoordFunction, ProductSpace};
use crate::rng::{draw_into, RandomSource};

/// Samples per shard (and per RNG stream).
pub const SHARD_SIZE: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub samples: usize,
    pub seed: u64,
    /// Worker threads.
    pub streams: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
            streams: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl EstimatorConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            ..Self::default()
        }
    }

    pub fn with_streams(mut self, streams: usize) -> Self {
        self.streams = streams;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(Error::Config(format!(
                "need at least 2 samples, got {}",
                self.samples
            )));
        }
        if self.streams == 0 {
            return Err(Error::Config("need at least one worker".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
    pub ci95: (f64, f64),
    /// Set when the estimate of a non-negative quantity came out negative;
    /// the value is still reported as is.
    pub negative: bool,
}

impl Estimate {
    pub fn new(mean: f64, stderr: f64, count: usize) -> Self {
        let stderr = stderr.max(0.0);
        Self {
            mean,
            stderr,
            count,
            ci95: (mean - 1.96 * stderr, mean + 1.96 * stderr),
            negative: mean < 0.0,
        }
    }

    /// Sample mean and its standard error.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let s2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self::new(mean, (s2 / n).sqrt(), xs.len())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.mean * c, self.stderr * c.abs(), self.count)
    }

    /// `(mean − truth) / stderr`; zero when both gaps vanish.
    pub fn z_score(&self, truth: f64) -> f64 {
        let gap = self.mean - truth;
        if self.stderr == 0.0 {
            if gap.abs() <= 1e-12 * truth.abs().max(1.0) {
                0.0
            } else {
                f64::INFINITY * gap.signum()
            }
        } else {
            gap / self.stderr
        }
    }

    pub fn within(&self, truth: f64, sigmas: f64) -> bool {
        self.z_score(truth).abs() <= sigmas
    }

    pub fn row(&self, quantity: &str, k: Option<usize>, seed: u64) -> EstimateRow {
        EstimateRow {
            quantity: quantity.to_string(),
            k,
            mean: self.mean,
            stderr: self.stderr,
            count: self.count,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub quantity: String,
    pub k: Option<usize>,
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
    pub seed: u64,
}

/// Runs `f` `cfg.samples` times across shards. Each shard builds its own
/// scratch state with `init`.
pub fn sample_with<T, S, I, F>(cfg: &EstimatorConfig, init: I, f: F) -> Result<Vec<T>>
where
    T: Send,
    I: Fn() -> S + Sync,
    F: Fn(&mut RandomSource, &mut S) -> T + Sync,
{
    cfg.validate()?;
    let shards = cfg.samples.div_ceil(SHARD_SIZE);
    let run = || {
        (0..shards)
            .into_par_iter()
            .map(|s| {
                let len = SHARD_SIZE.min(cfg.samples - s * SHARD_SIZE);
                let mut rng = RandomSource::new(cfg.seed, s as u64);
                let mut scratch = init();
                (0..len)
                    .map(|_| f(&mut rng, &mut scratch))
                    .collect::<Vec<T>>()
            })
            .collect::<Vec<_>>()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.streams)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(run).into_iter().flatten().collect())
}

pub fn sample<T, F>(cfg: &EstimatorConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RandomSource) -> T + Sync,
{
    sample_with(cfg, || (), |rng, _| f(rng))
}

/// Unbiased sample variance `s²` of i.i.d. evaluations of `S`.
///
/// The standard error uses the fourth central moment:
/// `Var(s²) ≈ (m4 − s⁴ (N−3)/(N−1)) / N`.
pub fn estimate_variance(
    space: &ProductSpace,
    f: &CoordFunction,
    cfg: &EstimatorConfig,
) -> Result<Estimate> {
    f.check_arity(space)?;
    let n = space.n();
    let xs = sample_with(
        cfg,
        || vec![0u32; n],
        |rng, buf| {
            draw_into(space, rng, buf);
            f.eval(buf)
        },
    )?;
    Ok(variance_estimate(&xs))
}

pub fn variance_estimate(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for x in xs {
        let d = (x - mean).powi(2);
        m2 += d;
        m4 += d * d;
    }
    let s2 = m2 / (n - 1.0);
    let m4 = m4 / n;
    let var_s2 = (m4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n;
    Estimate::new(s2, var_s2.max(0.0).sqrt(), xs.len())
}

struct BkScratch {
    x: Vec<u32>,
    xp: Vec<u32>,
    y: Vec<u32>,
    perm: Vec<usize>,
}

/// Unbiased estimate of `B_k` from `S(X)·(S^{i_1..i_{k−1}} − S^{i_1..i_k})`
/// with a uniformly random injective `k`-tuple.
pub fn estimate_b_k(
    space: &ProductSpace,
    f: &CoordFunction,
    k: usize,
    cfg: &EstimatorConfig,
) -> Result<Estimate> {
    f.check_arity(space)?;
    let n = space.n();
    if k == 0 || k > n {
        return Err(Error::Domain(format!("k = {k} outside 1..={n}")));
    }
    let xs = sample_with(
        cfg,
        || BkScratch {
            x: vec![0; n],
            xp: vec![0; n],
            y: vec![0; n],
            perm: Vec::with_capacity(n),
        },
        |rng, s| {
            draw_into(space, rng, &mut s.x);
            draw_into(space, rng, &mut s.xp);
            rng.partial_permutation(n, k, &mut s.perm);
            s.y.copy_from_slice(&s.x);
            for &i in &s.perm[..k - 1] {
                s.y[i] = s.xp[i];
            }
            let before = f.eval(&s.y);
            let last = s.perm[k - 1];
            s.y[last] = s.xp[last];
            f.eval(&s.x) * (before - f.eval(&s.y))
        },
    )?;
    Ok(Estimate::from_samples(&xs))
}

/// Draws `(Δ, Δ′)`: two effects that are conditionally independent given a
/// shared index, so `E[Δ Δ′]` is the average squared conditional mean.
pub trait PairSampler: Sync {
    fn sample_pair(&self, rng: &mut RandomSource) -> (f64, f64);
}

impl<F> PairSampler for F
where
    F: Fn(&mut RandomSource) -> (f64, f64) + Sync,
{
    fn sample_pair(&self, rng: &mut RandomSource) -> (f64, f64) {
        self(rng)
    }
}

/// Mean of `Δ·Δ′`; may be slightly negative when the target is zero.
pub fn paired_square_mean<P: PairSampler>(sampler: &P, cfg: &EstimatorConfig) -> Result<Estimate> {
    let xs = sample(cfg, |rng| {
        let (a, b) = sampler.sample_pair(rng);
        a * b
    })?;
    Ok(Estimate::from_samples(&xs))
}
