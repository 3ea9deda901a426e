use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{b_and_derivatives, correlation_table, ExactConfig, StateIndexer};
use crate::families::lcs_function;
use crate::mc::{paired_square_mean, sample_with, variance_estimate, Estimate, EstimatorConfig};
use crate::model::{CoordFunction, FiniteDistribution, ProductSpace};
use crate::rng::RandomSource;

use super::{lcs_length, Word};

/// Word length and letter laws of the two random words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcsModel {
    pub n: usize,
    pub x_dist: FiniteDistribution,
    pub y_dist: FiniteDistribution,
}

impl LcsModel {
    pub fn new(n: usize, x_dist: FiniteDistribution, y_dist: FiniteDistribution) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("word length must be at least 1".into()));
        }
        Ok(Self { n, x_dist, y_dist })
    }

    /// Both words uniform over `m` letters.
    pub fn uniform(n: usize, m: u32) -> Result<Self> {
        let d = FiniteDistribution::uniform(m)?;
        Self::new(n, d.clone(), d)
    }

    /// Both words Bernoulli with `P(1) = p`.
    pub fn binary(n: usize, p: f64) -> Result<Self> {
        let d = FiniteDistribution::bernoulli(p)?;
        Self::new(n, d.clone(), d)
    }

    /// The `2n` letters, `X` first then `Y`.
    pub fn space(&self) -> Result<ProductSpace> {
        let mut coords = vec![self.x_dist.clone(); self.n];
        coords.extend(std::iter::repeat_n(self.y_dist.clone(), self.n));
        ProductSpace::new(coords)
    }

    pub fn function(&self) -> Result<CoordFunction> {
        lcs_function(2 * self.n, self.n)
    }

    pub fn coord_dist(&self, k: usize) -> &FiniteDistribution {
        if k < self.n {
            &self.x_dist
        } else {
            &self.y_dist
        }
    }

    /// Fills `z` (length `2n`) with a fresh draw.
    pub fn draw(&self, rng: &mut RandomSource, z: &mut [u32]) {
        let (x, y) = z.split_at_mut(self.n);
        rng.fill(&self.x_dist, x);
        rng.fill(&self.y_dist, y);
    }

    pub fn lcs(&self, z: &[u32]) -> f64 {
        lcs_length(&z[..self.n], &z[self.n..]) as f64
    }

    /// Same law on both words, all letters equally likely: the condition
    /// under which the last `B` vanishes by relabelling symmetry.
    pub fn is_symmetric(&self) -> bool {
        let p = self.x_dist.probs();
        self.x_dist == self.y_dist && p.iter().all(|&q| (q - p[0]).abs() < 1e-12)
    }

    /// `P(1)` for a coordinate, if its alphabet is `{0, 1}`.
    fn binary_p(d: &FiniteDistribution) -> Option<f64> {
        let mut a = d.atoms().to_vec();
        a.sort_unstable();
        (a == [0, 1]).then(|| d.prob_of(1))
    }
}

/// `Var LC_n` by simulation; needs no product space, so any `n` works.
pub fn lcs_variance_estimate(model: &LcsModel, cfg: &EstimatorConfig) -> Result<Estimate> {
    let len = 2 * model.n;
    let xs = sample_with(
        cfg,
        || vec![0u32; len],
        |rng, z| {
            model.draw(rng, z);
            model.lcs(z)
        },
    )?;
    Ok(variance_estimate(&xs))
}

/// Unbiased estimate of `B_1(2n)`: one uniformly chosen letter is
/// resampled and `Δ²/2` is recorded.
pub fn b1_lcs_estimate(model: &LcsModel, cfg: &EstimatorConfig) -> Result<Estimate> {
    let len = 2 * model.n;
    let xs = sample_with(
        cfg,
        || vec![0u32; len],
        |rng, z| {
            model.draw(rng, z);
            let before = model.lcs(z);
            let j = rng.below(len);
            z[j] = rng.draw(model.coord_dist(j));
            let d = before - model.lcs(z);
            0.5 * d * d
        },
    )?;
    Ok(Estimate::from_samples(&xs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlastReport {
    /// Estimate of `B_{2n}(2n)`.
    pub b_last: Estimate,
    /// `2n · B̂_{2n}`, a lower bound on `Var LC_n`.
    pub variance_lower_bound: Estimate,
}

/// Effect of setting letter `k` to 1 rather than 0 on a fresh draw.
fn flip_effect(model: &LcsModel, rng: &mut RandomSource, z: &mut [u32], k: usize) -> f64 {
    model.draw(rng, z);
    z[k] = 1;
    let one = model.lcs(z);
    z[k] = 0;
    one - model.lcs(z)
}

/// `B_{2n}(2n) = (1/2n) Σ_k (E[LCS(Z^{k,1}) − LCS(Z^{k,0})])² p_k(1−p_k)`,
/// each square estimated by the product of two independent draws sharing
/// the index `k`.
pub fn blast_lcs_estimate(model: &LcsModel, cfg: &EstimatorConfig) -> Result<BlastReport> {
    let px = LcsModel::binary_p(&model.x_dist)
        .ok_or_else(|| Error::Precondition("x alphabet is not {0, 1}".into()))?;
    let py = LcsModel::binary_p(&model.y_dist)
        .ok_or_else(|| Error::Precondition("y alphabet is not {0, 1}".into()))?;
    let len = 2 * model.n;
    let sampler = |rng: &mut RandomSource| {
        let k = rng.below(len);
        let p = if k < model.n { px } else { py };
        let w = p * (1.0 - p);
        let mut z = vec![0u32; len];
        let a = flip_effect(model, rng, &mut z, k);
        let b = flip_effect(model, rng, &mut z, k);
        (a * w, b)
    };
    let b_last = paired_square_mean(&sampler, cfg)?;
    Ok(BlastReport {
        b_last,
        variance_lower_bound: b_last.scaled(len as f64),
    })
}

/// Exact `B_{2n}(2n)` from the enumeration engine.
pub fn blast_lcs_exact(model: &LcsModel, cfg: &ExactConfig) -> Result<f64> {
    let t = correlation_table(&model.space()?, &model.function()?, cfg)?;
    Ok(*b_and_derivatives(&t).b.last().unwrap())
}

/// Two replacement blocks, or the paired-letter variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub block_len: usize,
    pub w1: Word,
    pub w2: Word,
    /// Independent replica pairs per block index.
    pub replicas: usize,
    /// `b = 1` with `Z_i = (X_i, Y_i)`: the words hold `(x, y)` letters.
    pub paired: bool,
}

impl PerturbationSpec {
    pub fn blocks(w1: Word, w2: Word, replicas: usize) -> Result<Self> {
        if w1.len() != w2.len() || w1.is_empty() {
            return Err(Error::Config(format!(
                "replacement words must have equal positive length, got {} and {}",
                w1.len(),
                w2.len()
            )));
        }
        Ok(Self {
            block_len: w1.len(),
            w1,
            w2,
            replicas,
            paired: false,
        })
    }

    /// Letters `(0,0)` against `(0,1)`.
    pub fn paired_letters(replicas: usize) -> Self {
        Self {
            block_len: 1,
            w1: Word::new(vec![0, 0]),
            w2: Word::new(vec![0, 1]),
            replicas,
            paired: true,
        }
    }

    fn validate(&self, n: usize) -> Result<usize> {
        if self.replicas < 3 {
            return Err(Error::Config("need at least 3 replicas per index".into()));
        }
        if self.paired {
            if self.w1.len() != 2 || self.w2.len() != 2 {
                return Err(Error::Config("paired letters are (x, y) pairs".into()));
            }
            return Ok(n);
        }
        if self.block_len == 0 || !n.is_multiple_of(self.block_len) {
            return Err(Error::Precondition(format!(
                "block length {} does not divide n = {n}",
                self.block_len
            )));
        }
        Ok(n / self.block_len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    /// `(1/J) Σ_j (E[LCS(Z^{j,w1}) − LCS(Z^{j,w2})])²`.
    pub statistic: Estimate,
    /// Paired mode only: `B_n(n) = statistic / 4`.
    pub b_last: Option<Estimate>,
    pub blocks: usize,
}

fn block_effect(
    model: &LcsModel,
    spec: &PerturbationSpec,
    rng: &mut RandomSource,
    z: &mut [u32],
    j: usize,
) -> f64 {
    model.draw(rng, z);
    let n = model.n;
    let put = |z: &mut [u32], w: &Word| {
        if spec.paired {
            z[j] = w.letters[0];
            z[n + j] = w.letters[1];
        } else {
            let b = spec.block_len;
            z[j * b..(j + 1) * b].copy_from_slice(&w.letters);
        }
    };
    put(z, &spec.w1);
    let a = model.lcs(z);
    put(z, &spec.w2);
    a - model.lcs(z)
}

/// Unbiased `(E Δ)²` from `R` i.i.d. draws, averaging `Δ_a Δ_b` over all
/// ordered pairs `a ≠ b`, with a leave-one-out jackknife standard error.
pub fn square_of_mean(xs: &[f64]) -> Estimate {
    let r = xs.len() as f64;
    let s: f64 = xs.iter().sum();
    let q: f64 = xs.iter().map(|x| x * x).sum();
    let u = (s * s - q) / (r * (r - 1.0));
    let leave_out: Vec<f64> = xs
        .iter()
        .map(|x| ((s - x).powi(2) - (q - x * x)) / ((r - 1.0) * (r - 2.0)))
        .collect();
    let bar = leave_out.iter().sum::<f64>() / r;
    let var = (r - 1.0) / r * leave_out.iter().map(|v| (v - bar).powi(2)).sum::<f64>();
    Estimate::new(u, var.sqrt(), xs.len())
}

/// Stratified estimate over block indices: index `j` gets `replicas`
/// independent effects on RNG stream `j`, combined by [`square_of_mean`].
pub fn cell_statistic(
    model: &LcsModel,
    spec: &PerturbationSpec,
    cfg: &EstimatorConfig,
) -> Result<CellReport> {
    let blocks = spec.validate(model.n)?;
    cfg.validate()?;
    let run = || {
        (0..blocks)
            .into_par_iter()
            .map(|j| {
                let mut rng = RandomSource::new(cfg.seed, j as u64);
                let mut z = vec![0u32; 2 * model.n];
                let xs: Vec<f64> = (0..spec.replicas)
                    .map(|_| block_effect(model, spec, &mut rng, &mut z, j))
                    .collect();
                square_of_mean(&xs)
            })
            .collect::<Vec<_>>()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.streams)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let per_block = pool.install(run);
    let jf = blocks as f64;
    let mean = per_block.iter().map(|e| e.mean).sum::<f64>() / jf;
    let var = per_block.iter().map(|e| e.stderr * e.stderr).sum::<f64>() / (jf * jf);
    let statistic = Estimate::new(mean, var.sqrt(), blocks * spec.replicas);
    Ok(CellReport {
        statistic,
        b_last: spec.paired.then(|| statistic.scaled(0.25)),
        blocks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub n: usize,
    pub statistic: Estimate,
}

/// The block statistic over a grid of `n`, with a weighted least-squares
/// trend line through it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSeries {
    pub rows: Vec<SeriesRow>,
    /// Slope of statistic against `n`, weights `1/stderr²`.
    pub slope: f64,
    pub slope_stderr: f64,
    pub slope_ci95: (f64, f64),
    /// Intercept `a` of the fit `a + c/n`: the level the statistic
    /// settles to if the decay is an edge effect.
    pub plateau: f64,
    pub plateau_ci95: (f64, f64),
}

impl CellSeries {
    /// Smallest `mean / stderr` over the grid.
    pub fn min_z(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.statistic.z_score(0.0))
            .fold(f64::INFINITY, f64::min)
    }

    /// No significant decay: the slope CI contains 0 or lies above it.
    pub fn no_decay(&self) -> bool {
        self.slope_ci95.1 >= 0.0
    }
}

/// Runs [`cell_statistic`] for every `n` in `ns`; cell `n` uses seed
/// `cfg.seed + n` so the cells are independent.
pub fn cell_series(
    ns: &[usize],
    spec: &PerturbationSpec,
    cfg: &EstimatorConfig,
) -> Result<CellSeries> {
    let rows = ns
        .iter()
        .map(|&n| {
            let model = LcsModel::uniform(n, 2)?;
            let c = EstimatorConfig {
                seed: cfg.seed.wrapping_add(n as u64),
                ..*cfg
            };
            Ok(SeriesRow {
                n,
                statistic: cell_statistic(&model, spec, &c)?.statistic,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ys: Vec<f64> = rows.iter().map(|r| r.statistic.mean).collect();
    let ws: Vec<f64> = rows
        .iter()
        .map(|r| 1.0 / r.statistic.stderr.max(1e-300).powi(2))
        .collect();
    let ns_f: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let inv: Vec<f64> = ns_f.iter().map(|n| 1.0 / n).collect();
    let line = weighted_line(&ns_f, &ys, &ws);
    let edge = weighted_line(&inv, &ys, &ws);
    Ok(CellSeries {
        rows,
        slope: line.slope,
        slope_stderr: line.slope_se,
        slope_ci95: (
            line.slope - 1.96 * line.slope_se,
            line.slope + 1.96 * line.slope_se,
        ),
        plateau: edge.intercept,
        plateau_ci95: (
            edge.intercept - 1.96 * edge.intercept_se,
            edge.intercept + 1.96 * edge.intercept_se,
        ),
    })
}

struct Line {
    intercept: f64,
    slope: f64,
    intercept_se: f64,
    slope_se: f64,
}

/// Weighted least squares with known per-point variances `1/w`.
fn weighted_line(xs: &[f64], ys: &[f64], ws: &[f64]) -> Line {
    if xs.len() < 2 {
        let nan = f64::NAN;
        return Line {
            intercept: ys.first().copied().unwrap_or(nan),
            slope: 0.0,
            intercept_se: f64::INFINITY,
            slope_se: f64::INFINITY,
        };
    }
    let sw: f64 = ws.iter().sum();
    let xbar = xs.iter().zip(ws).map(|(x, w)| w * x).sum::<f64>() / sw;
    let ybar = ys.iter().zip(ws).map(|(y, w)| w * y).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(ws).map(|(x, w)| w * (x - xbar).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .zip(ws)
        .map(|((x, y), w)| w * (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    Line {
        intercept: ybar - slope * xbar,
        slope,
        intercept_se: (1.0 / sw + xbar * xbar / sxx).sqrt(),
        slope_se: (1.0 / sxx).sqrt(),
    }
}

/// Exact paired-letter statistic `(1/4n) Σ_j (E Δ_j)²` for uniform binary
/// words, by enumerating all `4^n` pairs.
pub fn paired_letter_exact(n: usize) -> Result<f64> {
    if n > 8 {
        return Err(Error::SpaceTooLarge {
            required: 2.0 * n as f64,
            allowed: 16.0,
        });
    }
    let model = LcsModel::uniform(n, 2)?;
    let space = model.space()?;
    let ix = StateIndexer::new(&space)?;
    let mut z = vec![0u32; 2 * n];
    let mut sums = vec![0.0; n];
    for idx in 0..ix.count() {
        ix.decode(idx, &mut z);
        for (j, s) in sums.iter_mut().enumerate() {
            let (x0, y0) = (z[j], z[n + j]);
            z[j] = 0;
            z[n + j] = 0;
            let a = model.lcs(&z);
            z[n + j] = 1;
            *s += a - model.lcs(&z);
            z[j] = x0;
            z[n + j] = y0;
        }
    }
    let count = ix.count() as f64;
    Ok(sums.iter().map(|s| (s / count).powi(2)).sum::<f64>() / (4.0 * n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_letter_alphabet_gives_zero() {
        let model = LcsModel::new(
            5,
            FiniteDistribution::degenerate(0),
            FiniteDistribution::degenerate(0),
        )
        .unwrap();
        let e = b1_lcs_estimate(&model, &EstimatorConfig::new(200, 1)).unwrap();
        assert_eq!((e.mean, e.stderr), (0.0, 0.0));
    }

    #[test]
    fn degenerate_p_gives_zero() {
        let model = LcsModel::binary(4, 0.0).unwrap();
        let r = blast_lcs_estimate(&model, &EstimatorConfig::new(300, 1)).unwrap();
        assert_eq!(r.b_last.mean, 0.0);
        assert_eq!(r.variance_lower_bound.mean, 0.0);
    }

    #[test]
    fn equal_words_give_zero() {
        let model = LcsModel::uniform(6, 2).unwrap();
        let w = Word::parse("10").unwrap();
        let spec = PerturbationSpec::blocks(w.clone(), w, 10).unwrap();
        let r = cell_statistic(&model, &spec, &EstimatorConfig::new(2, 0)).unwrap();
        assert_eq!(r.statistic.mean, 0.0);
        assert_eq!(r.blocks, 3);
    }

    #[test]
    fn divisibility_is_checked() {
        let model = LcsModel::uniform(5, 2).unwrap();
        let spec =
            PerturbationSpec::blocks(Word::parse("10").unwrap(), Word::parse("11").unwrap(), 10)
                .unwrap();
        assert!(cell_statistic(&model, &spec, &EstimatorConfig::new(2, 0)).is_err());
    }

    #[test]
    fn non_binary_rejected_for_last_b() {
        let model = LcsModel::uniform(3, 3).unwrap();
        assert!(blast_lcs_estimate(&model, &EstimatorConfig::new(10, 0)).is_err());
    }

    #[test]
    fn paired_exact_matches_engine() {
        for n in 1..=4 {
            let d = FiniteDistribution::uniform(4).unwrap();
            let space = ProductSpace::iid(d, n).unwrap();
            // atom 2x + y carries the letter pair (x, y)
            let f = CoordFunction::new(n, "paired lcs", |v| {
                let x: Vec<u32> = v.iter().map(|a| a >> 1).collect();
                let y: Vec<u32> = v.iter().map(|a| a & 1).collect();
                lcs_length(&x, &y) as f64
            });
            let t = correlation_table(&space, &f, &ExactConfig::default()).unwrap();
            let b_last = *b_and_derivatives(&t).b.last().unwrap();
            let direct = paired_letter_exact(n).unwrap();
            assert!(
                (b_last - direct).abs() < 1e-12,
                "n={n}: {b_last} vs {direct}"
            );
        }
    }
}
