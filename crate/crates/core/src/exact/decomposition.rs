use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::combinatorics::binom;
use crate::error::Result;
use crate::model::{CoordFunction, ProductSpace};

use super::table::{cross_table, level_means, CorrelationTable};
use super::ExactConfig;

/// `B_k`, the triangle of backward differences and the jackknife terms.
///
/// Vectors are zero-based: `b[k-1] = B_k`, `db[l][k-1] = D^l B_k`,
/// `jp[k-1] = J'_k`, `kp[k-1] = K'_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub n: usize,
    pub b: Vec<f64>,
    pub db: Vec<Vec<f64>>,
    pub jp: Vec<f64>,
    pub kp: Vec<f64>,
    pub variance: f64,
    pub exact: bool,
    /// Internal consistency checks, by name.
    pub residuals: BTreeMap<String, f64>,
}

impl DecompositionReport {
    /// `D^l B_k` with one-based `k`.
    pub fn db_at(&self, l: usize, k: usize) -> f64 {
        self.db[l][k - 1]
    }

    pub fn min_db(&self) -> f64 {
        self.db
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest magnitude among Var, `J'` and `K'`: the scale residuals are
    /// measured against.
    pub fn scale(&self) -> f64 {
        self.jp
            .iter()
            .chain(&self.kp)
            .fold(self.variance.abs(), |m, v| m.max(v.abs()))
    }
}

/// Backward differences from the level means `c̄(s)` of the table:
/// averaging `S·(Δ_A S)^B` over disjoint `|A| = l+1`, `|B| = k-1` collapses
/// to `D^l B_k = Σ_j (-1)^j C(l+1, j) c̄(j+k-1)`.
fn difference_triangle(n: usize, levels: &[f64]) -> Vec<Vec<f64>> {
    (0..n)
        .map(|l| {
            (1..=n - l)
                .map(|k| {
                    (0..=l + 1)
                        .map(|j| {
                            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                            sign * binom(l + 1, j) * levels[j + k - 1]
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// `B_k` as the average over `i` and `(k-1)`-sets `β ∌ i` of
/// `C(β) − C(β ∪ {i})`.
fn b_by_pairs(n: usize, table: &[f64]) -> Vec<f64> {
    let mut sums = vec![0.0; n];
    for (beta, &c) in table.iter().enumerate() {
        let s = beta.count_ones() as usize;
        if s == n {
            continue;
        }
        for i in 0..n {
            if beta & (1 << i) == 0 {
                sums[s] += c - table[beta | (1 << i)];
            }
        }
    }
    sums.iter()
        .enumerate()
        .map(|(s, v)| v / ((n - s) as f64 * binom(n, s)))
        .collect()
}

pub fn b_and_derivatives(t: &CorrelationTable) -> DecompositionReport {
    let n = t.n;
    let levels = t.level_means();
    let db = difference_triangle(n, &levels);
    let b = db[0].clone();
    let mut residuals = BTreeMap::new();

    let pairs = b_by_pairs(n, &t.centered);
    let pair_gap = pairs
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    residuals.insert("b_pairs_vs_levels".to_string(), pair_gap);

    let mut recurrence: f64 = 0.0;
    for l in 0..n.saturating_sub(1) {
        for k in 0..n - l - 1 {
            recurrence = recurrence.max((db[l][k] - db[l][k + 1] - db[l + 1][k]).abs());
        }
    }
    residuals.insert("difference_recurrence".to_string(), recurrence);

    let mut r = DecompositionReport {
        n,
        b,
        db,
        jp: Vec::new(),
        kp: Vec::new(),
        variance: t.variance(),
        exact: t.exact,
        residuals,
    };
    let (jp, kp) = jackknife_from_table(&r);
    r.jp = jp;
    r.kp = kp;
    r
}

/// `J'_k = C(n,k) D^{k-1} B_1` and `K'_k = C(n,k) D^{k-1} B_{n-k+1}`.
pub fn jackknife_from_table(r: &DecompositionReport) -> (Vec<f64>, Vec<f64>) {
    let n = r.n;
    let jp = (1..=n).map(|k| binom(n, k) * r.db_at(k - 1, 1)).collect();
    let kp = (1..=n)
        .map(|k| binom(n, k) * r.db_at(k - 1, n - k + 1))
        .collect();
    (jp, kp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceDecomposition {
    pub b: Vec<f64>,
    pub covariance: f64,
}

/// `B_k(S, T)` from the polarised table `E[S·T^α]`.
pub fn covariance_b(
    space: &ProductSpace,
    f: &CoordFunction,
    g: &CoordFunction,
    cfg: &ExactConfig,
) -> Result<CovarianceDecomposition> {
    let t = cross_table(space, f, g, cfg)?;
    let levels = level_means(t.n, &t.centered);
    Ok(CovarianceDecomposition {
        b: (1..=t.n).map(|k| levels[k - 1] - levels[k]).collect(),
        covariance: t.covariance(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::correlation_table;
    use crate::families::{additive, parity, rademacher_space, ValueTable};

    fn report(f: &CoordFunction, n: usize) -> DecompositionReport {
        let space = rademacher_space(n).unwrap();
        b_and_derivatives(&correlation_table(&space, f, &ExactConfig::default()).unwrap())
    }

    #[test]
    fn parity_three() {
        let f = parity(ValueTable::rademacher(3), vec![0, 1, 2]).unwrap();
        let r = report(&f, 3);
        assert_eq!(r.b, vec![1.0, 0.0, 0.0]);
        assert_eq!(r.db_at(1, 1), 1.0);
        assert_eq!(r.db_at(2, 1), 1.0);
        assert_eq!(r.jp, vec![3.0, 3.0, 1.0]);
        assert_eq!(r.kp, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn additive_three() {
        let f = additive(ValueTable::rademacher(3), None).unwrap();
        let r = report(&f, 3);
        assert_eq!(r.b, vec![1.0, 1.0, 1.0]);
        for l in 1..3 {
            assert!(r.db[l].iter().all(|&v| v == 0.0));
        }
        assert_eq!(r.jp, vec![3.0, 0.0, 0.0]);
        assert_eq!(r.kp, vec![3.0, 0.0, 0.0]);
    }

    #[test]
    fn constant_is_all_zero() {
        let f = CoordFunction::new(4, "c", |_| -3.0);
        let r = report(&f, 4);
        assert!(r.db.iter().flatten().all(|&v| v == 0.0));
        assert!(r.jp.iter().chain(&r.kp).all(|&v| v == 0.0));
    }

    #[test]
    fn triangle_shape() {
        let f = additive(
            ValueTable::rademacher(5),
            Some(vec![1.0, 2.0, 0.5, 0.0, 3.0]),
        )
        .unwrap();
        let r = report(&f, 5);
        for (l, row) in r.db.iter().enumerate() {
            assert_eq!(row.len(), 5 - l);
        }
        assert!(r.residuals.values().all(|&v| v < 1e-12));
    }

    #[test]
    fn covariance_cases() {
        let space = rademacher_space(3).unwrap();
        let cfg = ExactConfig::default();
        let vals = ValueTable::rademacher(3);
        let x1 = parity(vals.clone(), vec![0]).unwrap();
        let x1x2 = parity(vals.clone(), vec![0, 1]).unwrap();
        let c = covariance_b(&space, &x1, &x1x2, &cfg).unwrap();
        assert_eq!(c.covariance, 0.0);
        assert!(c.b.iter().all(|&v| v == 0.0));

        let x3 = parity(vals.clone(), vec![2]).unwrap();
        let d = covariance_b(&space, &x1x2, &x3, &cfg).unwrap();
        assert!(d.b.iter().all(|&v| v == 0.0));

        let s = additive(vals, Some(vec![1.0, -2.0, 0.5])).unwrap();
        let diag = covariance_b(&space, &s, &s, &cfg).unwrap();
        let r = b_and_derivatives(&correlation_table(&space, &s, &cfg).unwrap());
        for (a, b) in diag.b.iter().zip(&r.b) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
