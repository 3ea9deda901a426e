//! Correlation tables `C(α) = E[S·S^α]` by exhaustive enumeration.
//!
//! `C(α)` is computed as `E[(E^α S)²]`: coordinates in `α` are integrated
//! out of the value table one at a time while walking the subset lattice
//! depth first, so each node costs the size of its conditional-mean table.
//! For binary supports the walk visits `3^n` cells in total.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CoordFunction, ProductSpace, SubsetMask};

use super::ExactConfig;

/// Mixed-radix indexing of the joint states, coordinate 0 fastest.
#[derive(Debug, Clone)]
pub struct StateIndexer {
    radices: Vec<usize>,
    atoms: Vec<Vec<u32>>,
    count: usize,
}

impl StateIndexer {
    pub fn new(space: &ProductSpace) -> Result<Self> {
        let count = space.state_count().ok_or(Error::SpaceTooLarge {
            required: space.state_bits(),
            allowed: 63.0,
        })?;
        Ok(Self {
            radices: space.coords().iter().map(|d| d.len()).collect(),
            atoms: space.coords().iter().map(|d| d.atoms().to_vec()).collect(),
            count,
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Writes the atom ids of state `idx` into `out`.
    pub fn decode(&self, mut idx: usize, out: &mut [u32]) {
        for (i, r) in self.radices.iter().enumerate() {
            out[i] = self.atoms[i][idx % r];
            idx /= r;
        }
    }

    pub fn encode(&self, values: &[u32]) -> Option<usize> {
        let mut idx = 0;
        let mut stride = 1;
        for (i, &v) in values.iter().enumerate() {
            let pos = self.atoms[i].iter().position(|&a| a == v)?;
            idx += pos * stride;
            stride *= self.radices[i];
        }
        Some(idx)
    }

    /// Evaluates `f` on every joint state.
    pub fn tabulate(&self, f: &CoordFunction) -> Vec<f64> {
        const CHUNK: usize = 4096;
        let n = self.radices.len();
        let mut out = vec![0.0; self.count];
        out.par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| {
                let mut buf = vec![0u32; n];
                for (j, slot) in chunk.iter_mut().enumerate() {
                    self.decode(c * CHUNK + j, &mut buf);
                    *slot = f.eval(&buf);
                }
            });
        out
    }
}

#[derive(Debug, Clone)]
struct Dim {
    coord: usize,
    probs: Vec<f64>,
}

/// Integrates out the dimension at `pos`; `dims` are in storage order.
fn marginalize(table: &[f64], dims: &[Dim], pos: usize) -> Vec<f64> {
    let stride: usize = dims[..pos].iter().map(|d| d.probs.len()).product();
    let probs = &dims[pos].probs;
    let radix = probs.len();
    let block = stride * radix;
    let mut out = vec![0.0; table.len() / radix];
    for (hi, chunk) in table.chunks_exact(block).enumerate() {
        let dst = &mut out[hi * stride..(hi + 1) * stride];
        for (d, p) in probs.iter().enumerate() {
            let src = &chunk[d * stride..(d + 1) * stride];
            for (o, s) in dst.iter_mut().zip(src) {
                *o += p * s;
            }
        }
    }
    out
}

/// Expectation of a table over all of its remaining dimensions.
fn full_average(mut table: Vec<f64>, dims: &[Dim]) -> f64 {
    for k in (0..dims.len()).rev() {
        table = marginalize(&table, &dims[..=k], k);
    }
    table[0]
}

/// Depth-first walk over subsets: at each node the tables hold `E^α` of
/// the inputs and `node` reduces them to the recorded value.
fn walk<F>(
    tables: &[Vec<f64>],
    dims: &[Dim],
    alpha: u64,
    start: usize,
    node: &F,
    out: &mut Vec<(u64, f64)>,
) where
    F: Fn(&[Vec<f64>], &[Dim]) -> f64 + Sync,
{
    out.push((alpha, node(tables, dims)));
    for pos in 0..dims.len() {
        let coord = dims[pos].coord;
        if coord < start {
            continue;
        }
        let child: Vec<Vec<f64>> = tables.iter().map(|t| marginalize(t, dims, pos)).collect();
        let mut child_dims = dims.to_vec();
        child_dims.remove(pos);
        walk(
            &child,
            &child_dims,
            alpha | 1 << coord,
            coord + 1,
            node,
            out,
        );
    }
}

fn correlate<F>(space: &ProductSpace, tables: Vec<Vec<f64>>, node: F) -> Vec<f64>
where
    F: Fn(&[Vec<f64>], &[Dim]) -> f64 + Sync,
{
    let n = space.n();
    let dims: Vec<Dim> = space
        .coords()
        .iter()
        .enumerate()
        .map(|(coord, d)| Dim {
            coord,
            probs: d.probs().to_vec(),
        })
        .collect();
    let mut corr = vec![0.0; 1 << n];
    corr[0] = node(&tables, &dims);
    // one independent subtree per first coordinate added
    let branches: Vec<Vec<(u64, f64)>> = (0..n)
        .into_par_iter()
        .map(|pos| {
            let child: Vec<Vec<f64>> = tables.iter().map(|t| marginalize(t, &dims, pos)).collect();
            let mut child_dims = dims.clone();
            child_dims.remove(pos);
            let mut out = Vec::new();
            walk(&child, &child_dims, 1 << pos, pos + 1, &node, &mut out);
            out
        })
        .collect();
    for (mask, v) in branches.into_iter().flatten() {
        corr[mask as usize] = v;
    }
    corr
}

/// `corr[α] = E[S·S^α]` for every `α ⊆ [n]`, plus the moments of `S`.
///
/// The table is built from the centred values `S − E S`, which keeps
/// cancellation out of the higher differences; the raw table adds `(E S)²`
/// back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub n: usize,
    pub corr: Vec<f64>,
    pub centered: Vec<f64>,
    pub mean: f64,
    pub second_moment: f64,
    /// Dyadic probabilities and integer values: exact-tolerance instance.
    pub exact: bool,
}

impl CorrelationTable {
    pub fn variance(&self) -> f64 {
        self.centered[0]
    }

    pub fn get(&self, mask: SubsetMask) -> f64 {
        self.corr[mask.bits() as usize]
    }

    /// `E[(E^α S − E S)²]`.
    pub fn centered_at(&self, mask: SubsetMask) -> f64 {
        self.centered[mask.bits() as usize]
    }

    /// Mean of the centred table over the subsets of each size.
    pub fn level_means(&self) -> Vec<f64> {
        level_means(self.n, &self.centered)
    }

    /// Largest violation of the structural invariants, relative to
    /// `max(1, E S²)`.
    pub fn invariant_violation(&self) -> f64 {
        let full = (1usize << self.n) - 1;
        let scale = self.second_moment.abs().max(1.0);
        let mut worst = (self.corr[0] - self.second_moment).abs();
        worst = worst.max((self.corr[full] - self.mean * self.mean).abs());
        worst = worst.max((-self.variance()).max(0.0));
        for &c in &self.centered {
            worst = worst.max((-c).max(0.0));
        }
        worst / scale
    }
}

pub(crate) fn level_means(n: usize, table: &[f64]) -> Vec<f64> {
    let mut sums = vec![0.0; n + 1];
    let mut counts = vec![0usize; n + 1];
    for (mask, v) in table.iter().enumerate() {
        let s = mask.count_ones() as usize;
        sums[s] += v;
        counts[s] += 1;
    }
    sums.iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect()
}

pub(crate) fn check_size(space: &ProductSpace, cfg: &ExactConfig) -> Result<()> {
    let bits = space.state_bits();
    if bits > cfg.max_state_bits + 1e-9 {
        return Err(Error::SpaceTooLarge {
            required: bits,
            allowed: cfg.max_state_bits,
        });
    }
    Ok(())
}

fn table_mean(space: &ProductSpace, values: &[f64]) -> f64 {
    let dims: Vec<Dim> = space
        .coords()
        .iter()
        .enumerate()
        .map(|(coord, d)| Dim {
            coord,
            probs: d.probs().to_vec(),
        })
        .collect();
    full_average(values.to_vec(), &dims)
}

/// Correlation table of `f` on `space`.
pub fn correlation_table(
    space: &ProductSpace,
    f: &CoordFunction,
    cfg: &ExactConfig,
) -> Result<CorrelationTable> {
    f.check_arity(space)?;
    check_size(space, cfg)?;
    let indexer = StateIndexer::new(space)?;
    let values = indexer.tabulate(f);
    let exact = space.is_exact() && values.iter().all(|v| v.fract() == 0.0);
    table_from_values(space, values, exact)
}

/// Correlation table of a function given by its values in
/// [`StateIndexer`] order.
pub fn correlation_table_from_values(
    space: &ProductSpace,
    values: Vec<f64>,
    cfg: &ExactConfig,
) -> Result<CorrelationTable> {
    check_size(space, cfg)?;
    let count = space.state_count().unwrap_or(usize::MAX);
    if values.len() != count {
        return Err(Error::Structural(format!(
            "{} values for {} states",
            values.len(),
            count
        )));
    }
    table_from_values(space, values, false)
}

fn table_from_values(
    space: &ProductSpace,
    values: Vec<f64>,
    exact: bool,
) -> Result<CorrelationTable> {
    let mean = table_mean(space, &values);
    let centered_values: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let centered = correlate(space, vec![centered_values], |t, dims| {
        full_average(t[0].iter().map(|v| v * v).collect(), dims)
    });
    let m2 = mean * mean;
    let corr: Vec<f64> = centered.iter().map(|c| c + m2).collect();
    Ok(CorrelationTable {
        n: space.n(),
        second_moment: corr[0],
        corr,
        centered,
        mean,
        exact,
    })
}

/// Polarised table `E[S·T^α] = E[E^α S · E^α T]` for a pair of functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossTable {
    pub n: usize,
    /// Centred: `E[(E^α S − E S)(E^α T − E T)]`.
    pub centered: Vec<f64>,
    pub mean_s: f64,
    pub mean_t: f64,
}

impl CrossTable {
    pub fn covariance(&self) -> f64 {
        self.centered[0]
    }

    /// Raw `E[S·T^α]`.
    pub fn raw(&self, mask: SubsetMask) -> f64 {
        self.centered[mask.bits() as usize] + self.mean_s * self.mean_t
    }
}

pub fn cross_table(
    space: &ProductSpace,
    f: &CoordFunction,
    g: &CoordFunction,
    cfg: &ExactConfig,
) -> Result<CrossTable> {
    if f.arity() != g.arity() {
        return Err(Error::ArityMismatch {
            expected: f.arity(),
            got: g.arity(),
        });
    }
    f.check_arity(space)?;
    check_size(space, cfg)?;
    let indexer = StateIndexer::new(space)?;
    let fs = indexer.tabulate(f);
    let gs = indexer.tabulate(g);
    let mean_s = table_mean(space, &fs);
    let mean_t = table_mean(space, &gs);
    let fs: Vec<f64> = fs.iter().map(|v| v - mean_s).collect();
    let gs: Vec<f64> = gs.iter().map(|v| v - mean_t).collect();
    let centered = correlate(space, vec![fs, gs], |t, dims| {
        full_average(t[0].iter().zip(&t[1]).map(|(a, b)| a * b).collect(), dims)
    });
    Ok(CrossTable {
        n: space.n(),
        centered,
        mean_s,
        mean_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{additive, parity, rademacher_space, ValueTable};
    use crate::model::FiniteDistribution;

    fn cfg() -> ExactConfig {
        ExactConfig::default()
    }

    #[test]
    fn rademacher_product_table() {
        let space = rademacher_space(2).unwrap();
        let f = parity(ValueTable::rademacher(2), vec![0, 1]).unwrap();
        let t = correlation_table(&space, &f, &cfg()).unwrap();
        assert_eq!(t.corr, vec![1.0, 0.0, 0.0, 0.0]);
        assert!(t.exact);
    }

    #[test]
    fn constant_table() {
        let space = ProductSpace::iid(FiniteDistribution::uniform(3).unwrap(), 3).unwrap();
        let f = CoordFunction::new(3, "const", |_| 2.5);
        let t = correlation_table(&space, &f, &cfg()).unwrap();
        for c in &t.corr {
            assert!((c - 6.25).abs() < 1e-14);
        }
        assert_eq!(t.variance(), 0.0);
    }

    #[test]
    fn additive_rademacher_table() {
        let space = rademacher_space(3).unwrap();
        let f = additive(ValueTable::rademacher(3), None).unwrap();
        let t = correlation_table(&space, &f, &cfg()).unwrap();
        for mask in 0..8u64 {
            assert_eq!(t.corr[mask as usize], 3.0 - mask.count_ones() as f64);
        }
    }

    #[test]
    fn size_cap_is_enforced() {
        let space = rademacher_space(12).unwrap();
        let f = CoordFunction::new(12, "zero", |_| 0.0);
        let small = ExactConfig {
            max_state_bits: 10.0,
            ..ExactConfig::default()
        };
        match correlation_table(&space, &f, &small) {
            Err(Error::SpaceTooLarge { required, allowed }) => {
                assert_eq!(required, 12.0);
                assert_eq!(allowed, 10.0);
            }
            other => panic!("expected size error, got {other:?}"),
        }
    }

    #[test]
    fn indexer_roundtrip() {
        let space = ProductSpace::new(vec![
            FiniteDistribution::new(vec![4, 9], vec![0.5, 0.5]).unwrap(),
            FiniteDistribution::uniform(3).unwrap(),
        ])
        .unwrap();
        let ix = StateIndexer::new(&space).unwrap();
        let mut buf = [0u32; 2];
        for idx in 0..ix.count() {
            ix.decode(idx, &mut buf);
            assert_eq!(ix.encode(&buf), Some(idx));
        }
        assert_eq!(ix.encode(&[5, 0]), None);
    }
}
