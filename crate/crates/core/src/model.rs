//! Finite product spaces, configurations, subset masks and the functions
//! studied on them.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PROB_SUM_TOL: f64 = 1e-12;

/// Law of a single coordinate: distinct small integer atoms with their
/// probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteDistribution {
    atoms: Vec<u32>,
    probs: Vec<f64>,
    /// Probabilities are dyadic rationals, so sums of products are exact.
    #[serde(default)]
    exact: bool,
}

impl FiniteDistribution {
    pub fn new(atoms: Vec<u32>, probs: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        if atoms.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} atoms but {} probabilities",
                atoms.len(),
                probs.len()
            )));
        }
        let mut sorted = atoms.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidDistribution("duplicate atom ids".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("bad probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        let exact = probs.iter().all(|&p| is_dyadic(p));
        Ok(Self {
            atoms,
            probs,
            exact,
        })
    }

    /// Uniform law on atoms `0..m`.
    pub fn uniform(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        Self::new((0..m).collect(), vec![1.0 / m as f64; m as usize])
    }

    /// Atoms `{0, 1}` with `P(1) = p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(vec![0, 1], vec![1.0 - p, p])
    }

    pub fn degenerate(atom: u32) -> Self {
        Self {
            atoms: vec![atom],
            probs: vec![1.0],
            exact: true,
        }
    }

    pub fn atoms(&self) -> &[u32] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn contains(&self, atom: u32) -> bool {
        self.atoms.contains(&atom)
    }

    pub fn prob_of(&self, atom: u32) -> f64 {
        self.atoms
            .iter()
            .position(|&a| a == atom)
            .map_or(0.0, |i| self.probs[i])
    }

    /// Largest atom id plus one.
    pub fn id_bound(&self) -> usize {
        self.atoms.iter().copied().max().unwrap_or(0) as usize + 1
    }

    /// `Σ p²`, the collision probability.
    pub fn collision(&self) -> f64 {
        self.probs.iter().map(|p| p * p).sum()
    }

    /// Inverse-CDF lookup in stored order. `u` is in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> u32 {
        let mut acc = 0.0;
        for (a, p) in self.atoms.iter().zip(&self.probs) {
            acc += p;
            if u < acc {
                return *a;
            }
        }
        // rounding left a sliver at the top; give it to the last atom with mass
        let last = self
            .probs
            .iter()
            .rposition(|&p| p > 0.0)
            .unwrap_or(self.atoms.len() - 1);
        self.atoms[last]
    }
}

fn is_dyadic(p: f64) -> bool {
    // p * 2^30 integral covers every probability we treat as exact
    let scaled = p * (1u64 << 30) as f64;
    scaled == scaled.trunc()
}

/// Ordered list of independent coordinate laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSpace {
    coords: Vec<FiniteDistribution>,
}

impl ProductSpace {
    pub fn new(coords: Vec<FiniteDistribution>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidDistribution(
                "product space needs n >= 1".into(),
            ));
        }
        if coords.len() > 63 {
            return Err(Error::InvalidDistribution(
                "at most 63 coordinates are supported".into(),
            ));
        }
        Ok(Self { coords })
    }

    pub fn iid(dist: FiniteDistribution, n: usize) -> Result<Self> {
        Self::new(vec![dist; n])
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[FiniteDistribution] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &FiniteDistribution {
        &self.coords[i]
    }

    /// `Σ log2 |support_i|`.
    pub fn state_bits(&self) -> f64 {
        self.coords.iter().map(|d| (d.len() as f64).log2()).sum()
    }

    /// Number of joint states, if it fits in `usize`.
    pub fn state_count(&self) -> Option<usize> {
        self.coords
            .iter()
            .try_fold(1usize, |acc, d| acc.checked_mul(d.len()))
    }

    pub fn is_exact(&self) -> bool {
        self.coords.iter().all(FiniteDistribution::is_exact)
    }

    pub fn full_mask(&self) -> SubsetMask {
        SubsetMask::full(self.n())
    }

    pub fn validate(&self, c: &Configuration) -> Result<()> {
        if c.len() != self.n() {
            return Err(Error::InvalidConfiguration(format!(
                "length {} for a space of {} coordinates",
                c.len(),
                self.n()
            )));
        }
        for (i, (v, d)) in c.values().iter().zip(&self.coords).enumerate() {
            if !d.contains(*v) {
                return Err(Error::InvalidConfiguration(format!(
                    "coordinate {i} holds atom {v} outside its support"
                )));
            }
        }
        Ok(())
    }
}

/// A realization of the coordinates, as atom ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration(Vec<u32>);

impl Configuration {
    pub fn new(values: Vec<u32>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [u32] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.0
    }
}

impl From<Vec<u32>> for Configuration {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

/// A subset of coordinate indices, as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SubsetMask(pub u64);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub fn full(n: usize) -> Self {
        if n >= 64 {
            SubsetMask(u64::MAX)
        } else {
            SubsetMask((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        SubsetMask(1u64 << i)
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        SubsetMask(indices.into_iter().fold(0u64, |m, i| m | (1u64 << i)))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn union(self, other: SubsetMask) -> SubsetMask {
        SubsetMask(self.0 | other.0)
    }

    pub fn symmetric_difference(self, other: SubsetMask) -> SubsetMask {
        SubsetMask(self.0 ^ other.0)
    }

    pub fn is_disjoint(self, other: SubsetMask) -> bool {
        self.0 & other.0 == 0
    }

    pub fn check(self, n: usize) -> Result<()> {
        if self.0 & !SubsetMask::full(n).0 != 0 {
            Err(Error::InvalidMask { mask: self.0, n })
        } else {
            Ok(())
        }
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                Some(i)
            }
        })
    }

    /// All subsets of `self`, the empty set first.
    pub fn subsets(self) -> impl Iterator<Item = SubsetMask> {
        let full = self.0;
        let mut cur = Some(0u64);
        std::iter::from_fn(move || {
            let c = cur?;
            cur = if c == full {
                None
            } else {
                Some((c.wrapping_sub(full)) & full)
            };
            Some(SubsetMask(c))
        })
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.indices().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionFlags {
    pub permutation_symmetric: bool,
    /// Every one-coordinate increment has absolute value 0 or 1.
    pub boolean_increments: bool,
    /// Values are integers (or dyadic) so exact sums carry no rounding.
    pub integer_valued: bool,
}

type Evaluator = dyn Fn(&[u32]) -> f64 + Send + Sync;

/// The function `S` under study: a pure map from configurations to reals.
#[derive(Clone)]
pub struct CoordFunction {
    arity: usize,
    label: String,
    flags: FunctionFlags,
    eval: Arc<Evaluator>,
}

impl CoordFunction {
    pub fn new<F>(arity: usize, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[u32]) -> f64 + Send + Sync + 'static,
    {
        Self {
            arity,
            label: label.into(),
            flags: FunctionFlags::default(),
            eval: Arc::new(f),
        }
    }

    pub fn with_flags(mut self, flags: FunctionFlags) -> Self {
        self.flags = flags;
        self
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn flags(&self) -> FunctionFlags {
        self.flags
    }

    #[inline]
    pub fn eval(&self, values: &[u32]) -> f64 {
        debug_assert_eq!(values.len(), self.arity);
        (self.eval)(values)
    }

    pub fn eval_config(&self, c: &Configuration) -> f64 {
        self.eval(c.values())
    }

    pub fn check_arity(&self, space: &ProductSpace) -> Result<()> {
        if self.arity != space.n() {
            Err(Error::ArityMismatch {
                expected: space.n(),
                got: self.arity,
            })
        } else {
            Ok(())
        }
    }
}

impl fmt::Debug for CoordFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoordFunction")
            .field("arity", &self.arity)
            .field("label", &self.label)
            .field("flags", &self.flags)
            .finish_non_exhaustive()
    }
}

/// `S^α` on the level of configurations: coordinates in `mask` come from
/// `replacement`, the rest from `c`.
pub fn resample(
    c: &Configuration,
    mask: SubsetMask,
    replacement: &Configuration,
) -> Result<Configuration> {
    let n = c.len();
    if replacement.len() != n {
        return Err(Error::InvalidConfiguration(format!(
            "replacement has length {} but configuration has {n}",
            replacement.len()
        )));
    }
    mask.check(n)?;
    Ok(Configuration(resample_values(
        c.values(),
        mask,
        replacement.values(),
    )))
}

pub(crate) fn resample_values(c: &[u32], mask: SubsetMask, r: &[u32]) -> Vec<u32> {
    c.iter()
        .zip(r)
        .enumerate()
        .map(|(i, (&a, &b))| if mask.contains(i) { b } else { a })
        .collect()
}

/// `Δ_α S = Σ_{α' ⊆ α} (-1)^{|α'|} S^{α'}` at the pair `(c, r)`.
pub fn delta_eval(
    f: &CoordFunction,
    c: &Configuration,
    r: &Configuration,
    mask: SubsetMask,
) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::Domain(
            "the difference operator needs a non-empty mask".into(),
        ));
    }
    if c.len() != f.arity() {
        return Err(Error::ArityMismatch {
            expected: f.arity(),
            got: c.len(),
        });
    }
    mask.check(c.len())?;
    if r.len() != c.len() {
        return Err(Error::InvalidConfiguration(
            "replacement length differs".into(),
        ));
    }
    let mut buf = c.values().to_vec();
    let mut total = 0.0;
    for sub in mask.subsets() {
        for i in mask.indices() {
            buf[i] = if sub.contains(i) {
                r.values()[i]
            } else {
                c.values()[i]
            };
        }
        let sign = if sub.len() % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * f.eval(&buf);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rademacher_product() -> CoordFunction {
        CoordFunction::new(2, "x1x2", |v| {
            v.iter().map(|&a| if a == 1 { 1.0 } else { -1.0 }).product()
        })
    }

    #[test]
    fn distribution_validation() {
        assert!(FiniteDistribution::new(vec![], vec![]).is_err());
        assert!(FiniteDistribution::new(vec![0, 0], vec![0.5, 0.5]).is_err());
        assert!(FiniteDistribution::new(vec![0, 1], vec![0.5, 0.6]).is_err());
        assert!(FiniteDistribution::new(vec![0, 1], vec![1.5, -0.5]).is_err());
        assert!(FiniteDistribution::new(vec![0], vec![0.5, 0.5]).is_err());
        let d = FiniteDistribution::new(vec![3, 7], vec![0.25, 0.75]).unwrap();
        assert!(d.is_exact());
        assert_eq!(d.id_bound(), 8);
        assert!(!FiniteDistribution::uniform(3).unwrap().is_exact());
    }

    #[test]
    fn quantile_follows_stored_order() {
        let d = FiniteDistribution::new(vec![5, 2], vec![0.25, 0.75]).unwrap();
        assert_eq!(d.quantile(0.0), 5);
        assert_eq!(d.quantile(0.2499), 5);
        assert_eq!(d.quantile(0.25), 2);
        assert_eq!(d.quantile(0.999999), 2);
    }

    #[test]
    fn resample_examples() {
        let c = Configuration::new(vec![0, 1, 0]);
        let r = Configuration::new(vec![1, 1, 1]);
        let out = resample(&c, SubsetMask::singleton(2), &r).unwrap();
        assert_eq!(out.values(), &[0, 1, 1]);
        assert_eq!(resample(&c, SubsetMask::EMPTY, &r).unwrap(), c);
        assert_eq!(resample(&c, SubsetMask::full(3), &r).unwrap(), r);
        assert!(matches!(
            resample(&c, SubsetMask::singleton(3), &r),
            Err(Error::InvalidMask { .. })
        ));
    }

    #[test]
    fn delta_examples() {
        let additive = CoordFunction::new(3, "sum", |v| v.iter().map(|&a| a as f64).sum());
        let c = Configuration::new(vec![2, 5, 1]);
        let r = Configuration::new(vec![0, 3, 4]);
        let d1 = delta_eval(&additive, &c, &r, SubsetMask::singleton(1)).unwrap();
        assert_eq!(d1, 5.0 - 3.0);
        let d12 = delta_eval(&additive, &c, &r, SubsetMask::from_indices([0, 1])).unwrap();
        assert_eq!(d12, 0.0);
        assert!(matches!(
            delta_eval(&additive, &c, &r, SubsetMask::EMPTY),
            Err(Error::Domain(_))
        ));

        // x1 x2 on ±1 with c = (1,1), r = (-1,-1): 1 - (-1) - (-1) + 1
        let f = rademacher_product();
        let c = Configuration::new(vec![1, 1]);
        let r = Configuration::new(vec![0, 0]);
        assert_eq!(delta_eval(&f, &c, &r, SubsetMask::full(2)).unwrap(), 4.0);
    }

    #[test]
    fn subsets_enumeration() {
        let m = SubsetMask::from_indices([1, 3, 4]);
        let subs: Vec<_> = m.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert_eq!(subs[0], SubsetMask::EMPTY);
        assert!(subs.iter().all(|s| s.0 & !m.0 == 0));
        assert_eq!(SubsetMask::EMPTY.subsets().count(), 1);
        assert_eq!(m.to_string(), "{1,3,4}");
    }
}
