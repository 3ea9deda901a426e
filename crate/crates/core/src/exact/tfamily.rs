use serde::{Deserialize, Serialize};

use crate::combinatorics::binom;

use super::table::CorrelationTable;

/// Expectations of the `T_A` family and of their weighted sum `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TFamily {
    /// `E T_A`, indexed by the mask of `A` (zero at the full set).
    pub per_subset: Vec<f64>,
    /// `E T`.
    pub total: f64,
    /// Per-level weighted sums, one per `k`: these reproduce `B_k`.
    pub level_b: Vec<f64>,
}

/// `E T_A = 2 Σ_{j ∉ A} (C(A) − C(A ∪ {j}))`.
pub fn t_family(t: &CorrelationTable) -> TFamily {
    let n = t.n;
    let c = &t.centered;
    let full = (1usize << n) - 1;
    let mut per_subset = vec![0.0; 1 << n];
    let mut level_b = vec![0.0; n];
    for a in 0..full {
        let mut s = 0.0;
        for j in 0..n {
            if a & (1 << j) == 0 {
                s += c[a] - c[a | (1 << j)];
            }
        }
        per_subset[a] = 2.0 * s;
        let size = a.count_ones() as usize;
        level_b[size] += per_subset[a] / (2.0 * (n - size) as f64 * binom(n, size));
    }
    TFamily {
        per_subset,
        total: level_b.iter().sum(),
        level_b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{correlation_table, ExactConfig};
    use crate::families::{parity, rademacher_space, ValueTable};
    use crate::model::CoordFunction;

    #[test]
    fn parity_three() {
        let space = rademacher_space(3).unwrap();
        let f = parity(ValueTable::rademacher(3), vec![0, 1, 2]).unwrap();
        let t = correlation_table(&space, &f, &ExactConfig::default()).unwrap();
        let tf = t_family(&t);
        assert_eq!(tf.per_subset[0], 6.0);
        assert_eq!(tf.level_b, vec![1.0, 0.0, 0.0]);
        assert_eq!(tf.total, 1.0);
    }

    #[test]
    fn constant_is_zero() {
        let space = rademacher_space(3).unwrap();
        let f = CoordFunction::new(3, "c", |_| 7.0);
        let t = correlation_table(&space, &f, &ExactConfig::default()).unwrap();
        assert!(t_family(&t).per_subset.iter().all(|&v| v == 0.0));
    }
}
