//! Built-in function families and the JSON instance format.
//!
//! Coordinates carry atom ids; the real value of an atom is looked up in a
//! per-coordinate [`ValueTable`], which defaults to the id itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lcs::lcs_length;
use crate::model::{CoordFunction, FiniteDistribution, FunctionFlags, ProductSpace};

/// Real value of each atom id, per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable(Vec<Vec<f64>>);

impl ValueTable {
    pub fn new(rows: Vec<Vec<f64>>) -> Self {
        Self(rows)
    }

    /// Atom id `a` is worth `a`.
    pub fn identity(space: &ProductSpace) -> Self {
        Self(
            space
                .coords()
                .iter()
                .map(|d| (0..d.id_bound()).map(|a| a as f64).collect())
                .collect(),
        )
    }

    /// Atoms `0 -> -1`, `1 -> +1` on every coordinate.
    pub fn rademacher(n: usize) -> Self {
        Self(vec![vec![-1.0, 1.0]; n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn value(&self, coord: usize, atom: u32) -> f64 {
        self.0[coord][atom as usize]
    }

    fn check(&self, space: &ProductSpace) -> Result<()> {
        if self.n() != space.n() {
            return Err(Error::ArityMismatch {
                expected: space.n(),
                got: self.n(),
            });
        }
        for (i, (row, d)) in self.0.iter().zip(space.coords()).enumerate() {
            if row.len() < d.id_bound() {
                return Err(Error::Config(format!(
                    "value table for coordinate {i} has {} entries, atoms go up to {}",
                    row.len(),
                    d.id_bound() - 1
                )));
            }
        }
        Ok(())
    }
}

/// Fair ±1 coordinates: atoms `{0, 1}` with probability 1/2 each.
pub fn rademacher_space(n: usize) -> Result<ProductSpace> {
    ProductSpace::iid(FiniteDistribution::bernoulli(0.5)?, n)
}

/// `Σ w_i x_i`.
pub fn additive(values: ValueTable, weights: Option<Vec<f64>>) -> Result<CoordFunction> {
    let n = values.n();
    let weights = weights.unwrap_or_else(|| vec![1.0; n]);
    if weights.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            got: weights.len(),
        });
    }
    Ok(CoordFunction::new(n, "additive", move |v| {
        v.iter()
            .enumerate()
            .map(|(i, &a)| weights[i] * values.value(i, a))
            .sum()
    })
    .with_flags(FunctionFlags {
        permutation_symmetric: false,
        ..Default::default()
    }))
}

/// `Π_{i ∈ indices} x_i`.
pub fn parity(values: ValueTable, indices: Vec<usize>) -> Result<CoordFunction> {
    let n = values.n();
    if let Some(&i) = indices.iter().find(|&&i| i >= n) {
        return Err(Error::Config(format!("parity index {i} out of range")));
    }
    Ok(CoordFunction::new(n, "parity", move |v| {
        indices.iter().map(|&i| values.value(i, v[i])).product()
    }))
}

/// `x_1 x_2 ⋯ x_len`.
pub fn product_of_prefix(values: ValueTable, len: usize) -> Result<CoordFunction> {
    let n = values.n();
    if len > n {
        return Err(Error::Config(format!(
            "prefix length {len} exceeds n = {n}"
        )));
    }
    Ok(CoordFunction::new(
        n,
        format!("prefix_product_{len}"),
        move |v| (0..len).map(|i| values.value(i, v[i])).product(),
    ))
}

/// `x_i` with atom values; on `{0, 1}` bits this is the dictator.
pub fn dictator(values: ValueTable, i: usize) -> Result<CoordFunction> {
    if i >= values.n() {
        return Err(Error::Config(format!("dictator index {i} out of range")));
    }
    let n = values.n();
    Ok(
        CoordFunction::new(n, format!("dictator_{i}"), move |v| values.value(i, v[i])).with_flags(
            FunctionFlags {
                boolean_increments: true,
                ..Default::default()
            },
        ),
    )
}

/// OR over consecutive blocks of `width` bits of the AND within each block
/// (a trailing short block counts as its own tribe); values in `{0, 1}`.
pub fn tribes(n: usize, width: usize) -> Result<CoordFunction> {
    if width == 0 || width > n {
        return Err(Error::Config(format!(
            "tribe width {width} outside 1..={n}"
        )));
    }
    Ok(CoordFunction::new(n, format!("tribes_{width}"), move |v| {
        let hit = v.chunks(width).any(|t| t.iter().all(|&a| a == 1));
        if hit {
            1.0
        } else {
            0.0
        }
    })
    .with_flags(FunctionFlags {
        boolean_increments: true,
        integer_valued: true,
        ..Default::default()
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultilinearTerm {
    pub indices: Vec<usize>,
    pub coef: f64,
}

/// `Σ_T c_T Π_{i ∈ T} x_i`.
pub fn multilinear(values: ValueTable, terms: Vec<MultilinearTerm>) -> Result<CoordFunction> {
    let n = values.n();
    for t in &terms {
        if let Some(&i) = t.indices.iter().find(|&&i| i >= n) {
            return Err(Error::Config(format!("term index {i} out of range")));
        }
    }
    Ok(CoordFunction::new(n, "multilinear", move |v| {
        terms
            .iter()
            .map(|t| {
                t.coef
                    * t.indices
                        .iter()
                        .map(|&i| values.value(i, v[i]))
                        .product::<f64>()
            })
            .sum()
    }))
}

/// LCS of the first `split` coordinates against the remaining ones.
pub fn lcs_function(n: usize, split: usize) -> Result<CoordFunction> {
    if split > n {
        return Err(Error::Config(format!("split {split} exceeds n = {n}")));
    }
    Ok(CoordFunction::new(n, "lcs", move |v| {
        lcs_length(&v[..split], &v[split..]) as f64
    })
    .with_flags(FunctionFlags {
        boolean_increments: true,
        integer_valued: true,
        ..Default::default()
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordSpec {
    pub probs: Vec<f64>,
    /// Defaults to `0..probs.len()`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<u32>>,
    /// Real value per atom id; defaults to the id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FunctionSpec {
    Additive {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    Parity {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        indices: Option<Vec<usize>>,
    },
    ProductOfPrefix {
        len: usize,
    },
    Multilinear {
        terms: Vec<MultilinearTerm>,
    },
    Dictator {
        #[serde(default)]
        index: usize,
    },
    Tribes {
        width: usize,
    },
    Lcs {
        /// Defaults to `n / 2`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        split: Option<usize>,
    },
}

/// A product space plus a function, as read from a JSON config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    /// Explicit per-coordinate laws; alternatively `iid` + `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<CoordSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iid: Option<CoordSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub function: FunctionSpec,
}

impl InstanceSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn coord_specs(&self) -> Result<Vec<CoordSpec>> {
        match (&self.coords, &self.iid, self.n) {
            (Some(c), None, _) => Ok(c.clone()),
            (None, Some(c), Some(n)) => Ok(vec![c.clone(); n]),
            _ => Err(Error::Config(
                "give either `coords` or both `iid` and `n`".into(),
            )),
        }
    }

    pub fn build(&self) -> Result<(ProductSpace, CoordFunction)> {
        let specs = self.coord_specs()?;
        let mut coords = Vec::with_capacity(specs.len());
        let mut rows = Vec::with_capacity(specs.len());
        for s in &specs {
            let atoms = s
                .atoms
                .clone()
                .unwrap_or_else(|| (0..s.probs.len() as u32).collect());
            let d = FiniteDistribution::new(atoms, s.probs.clone())?;
            let row = match &s.values {
                Some(v) => v.clone(),
                None => (0..d.id_bound()).map(|a| a as f64).collect(),
            };
            coords.push(d);
            rows.push(row);
        }
        let space = ProductSpace::new(coords)?;
        let values = ValueTable::new(rows);
        values.check(&space)?;
        let n = space.n();
        let f = match &self.function {
            FunctionSpec::Additive { weights } => additive(values, weights.clone())?,
            FunctionSpec::Parity { indices } => {
                parity(values, indices.clone().unwrap_or_else(|| (0..n).collect()))?
            }
            FunctionSpec::ProductOfPrefix { len } => product_of_prefix(values, *len)?,
            FunctionSpec::Multilinear { terms } => multilinear(values, terms.clone())?,
            FunctionSpec::Dictator { index } => dictator(values, *index)?,
            FunctionSpec::Tribes { width } => tribes(n, *width)?,
            FunctionSpec::Lcs { split } => lcs_function(n, split.unwrap_or(n / 2))?,
        };
        Ok((space, f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_iid_rademacher_parity() {
        let spec = InstanceSpec::from_json(
            r#"{"iid": {"probs": [0.5, 0.5], "values": [-1, 1]}, "n": 3,
                "function": {"family": "parity"}}"#,
        )
        .unwrap();
        let (space, f) = spec.build().unwrap();
        assert_eq!(space.n(), 3);
        assert_eq!(f.eval(&[1, 1, 0]), -1.0);
        assert_eq!(f.eval(&[0, 0, 1]), 1.0);
    }

    #[test]
    fn parse_explicit_coords_multilinear() {
        let spec = InstanceSpec::from_json(
            r#"{"coords": [{"probs": [0.25, 0.75]}, {"probs": [0.2, 0.3, 0.5], "values": [1, 2, 4]}],
                "function": {"family": "multilinear",
                             "terms": [{"indices": [], "coef": 1.5}, {"indices": [0, 1], "coef": 2.0}]}}"#,
        )
        .unwrap();
        let (space, f) = spec.build().unwrap();
        assert_eq!(space.n(), 2);
        assert_eq!(f.eval(&[1, 2]), 1.5 + 2.0 * 4.0);
    }

    #[test]
    fn lcs_family_splits_in_half() {
        let spec = InstanceSpec::from_json(
            r#"{"iid": {"probs": [0.5, 0.5]}, "n": 6, "function": {"family": "lcs"}}"#,
        )
        .unwrap();
        let (_, f) = spec.build().unwrap();
        assert_eq!(f.eval(&[1, 0, 1, 0, 1, 0]), 2.0);
        assert_eq!(f.eval(&[1, 1, 1, 1, 1, 1]), 3.0);
    }

    #[test]
    fn tribes_and_dictator() {
        let t = tribes(5, 2).unwrap();
        assert_eq!(t.eval(&[1, 0, 0, 1, 0]), 0.0);
        assert_eq!(t.eval(&[0, 0, 1, 1, 0]), 1.0);
        assert_eq!(t.eval(&[0, 0, 0, 0, 1]), 1.0);
        assert!(tribes(3, 0).is_err());
        let space = rademacher_space(3).unwrap();
        let d = dictator(ValueTable::identity(&space), 2).unwrap();
        assert_eq!(d.eval(&[0, 0, 1]), 1.0);
        assert!(dictator(ValueTable::identity(&space), 3).is_err());
    }

    #[test]
    fn config_errors() {
        let bad = r#"{"n": 3, "function": {"family": "parity"}}"#;
        assert!(InstanceSpec::from_json(bad).unwrap().build().is_err());
        let short_values = r#"{"iid": {"probs": [0.5, 0.5], "values": [1]}, "n": 2,
                               "function": {"family": "additive"}}"#;
        assert!(InstanceSpec::from_json(short_values)
            .unwrap()
            .build()
            .is_err());
        assert!(InstanceSpec::from_json(r#"{"function": {"family": "nope"}}"#).is_err());
    }
}
