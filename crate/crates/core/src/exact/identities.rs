use crate::combinatorics::binom;
use crate::report::IdentityReport;

use super::decomposition::DecompositionReport;
use super::table::CorrelationTable;
use super::tfamily::t_family;
use super::{ExactConfig, EXACT_TOLERANCE};

fn sign(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Checks every variance identity and inequality the table implies.
///
/// Residuals are measured against `tolerance * max(1, scale)`, where the
/// scale is the largest of `Var`, `J'_k`, `K'_k`. Complete monotonicity
/// always uses the exact tolerance.
pub fn verify_identities(
    r: &DecompositionReport,
    t: &CorrelationTable,
    cfg: &ExactConfig,
) -> IdentityReport {
    let n = r.n;
    let var = r.variance;
    let jp = &r.jp;
    let kp = &r.kp;
    let scale = r.scale();
    let mut rep = IdentityReport::new(cfg.tolerance_for(r.exact));

    for (name, v) in &r.residuals {
        rep.check(name, None, *v, scale);
    }

    rep.check(
        "telescoping_sum",
        None,
        r.b.iter().sum::<f64>() - var,
        scale,
    );
    rep.check_abs(
        "complete_monotonicity",
        None,
        (-r.min_db()).max(0.0),
        EXACT_TOLERANCE * var.abs().max(1.0),
    );

    let alt_j: f64 = (1..=n).map(|k| sign(k - 1) * jp[k - 1]).sum();
    rep.check("alternating_j_sum", None, var - alt_j, scale);
    rep.check("k_sum", None, var - kp.iter().sum::<f64>(), scale);

    for k in 1..=n {
        rep.check_le("j_dominates_k", Some(k), kp[k - 1], jp[k - 1], scale);
        rep.check_le("k_nonnegative", Some(k), 0.0, kp[k - 1], scale);
    }

    // partial sums Var − J'_1 + … + (−1)^k J'_k and Var − K'_1 − … − K'_k
    let mut part_j = vec![var; n + 1];
    let mut part_k = vec![var; n + 1];
    for k in 1..=n {
        part_j[k] = part_j[k - 1] + sign(k) * jp[k - 1];
        part_k[k] = part_k[k - 1] - kp[k - 1];
    }

    for k in 1..=n {
        // remainder after k jackknife terms, as a sum of k-th differences
        let rhs_j: f64 = sign(k)
            * (1..=n - k)
                .map(|i| binom(n - i, k) * r.db_at(k, i))
                .sum::<f64>();
        rep.check("remainder_j", Some(k), part_j[k] - rhs_j, scale);

        let rhs_k: f64 = (1..=n - k)
            .map(|j| binom(j + k - 1, k) * r.db_at(k, j))
            .sum();
        rep.check("remainder_k", Some(k), part_k[k] - rhs_k, scale);
    }

    for k in 1..n {
        let mid = sign(k) * part_j[k];
        let lo = kp[k];
        let hi = jp[k];
        let viol = (lo - mid).max(mid - hi).max(0.0);
        rep.check("sandwich_alternating_j", Some(k), viol, scale);

        let mid = part_k[k];
        let viol = (lo - mid).max(mid - hi).max(0.0);
        rep.check("sandwich_k", Some(k), viol, scale);
    }

    for k in 1..=n {
        let head: f64 = (1..=k).map(|j| sign(j - 1) * jp[j - 1]).sum();
        let tail: f64 = (k + 1..=n).map(|j| binom(j - 1, k) * kp[j - 1]).sum();
        rep.check("mixed_j_k", Some(k), var - head - sign(k) * tail, scale);

        let head: f64 = (1..=k)
            .map(|i| sign(i - 1) * binom(k, i) / binom(n, i) * jp[i - 1])
            .sum();
        let tail: f64 = (1..=n - k)
            .map(|i| binom(n - k, i) / binom(n, i) * kp[i - 1])
            .sum();
        rep.check("truncated_j_k", Some(k), var - head - tail, scale);
    }

    for k in 1..=n {
        let from_j: f64 = (0..k)
            .map(|j| sign(j) * binom(k - 1, j) / binom(n, j + 1) * jp[j])
            .sum();
        rep.check("b_from_j", Some(k), r.b[k - 1] - from_j, scale);
        let from_k: f64 = (0..=n - k)
            .map(|j| binom(n - k, j) / binom(n, j + 1) * kp[j])
            .sum();
        rep.check("b_from_k", Some(k), r.b[k - 1] - from_k, scale);
    }

    let tf = t_family(t);
    rep.check("t_expectation", None, tf.total - var, scale);
    let level_gap = tf
        .level_b
        .iter()
        .zip(&r.b)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    rep.check("t_levels_reproduce_b", None, level_gap, scale);

    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{b_and_derivatives, correlation_table};
    use crate::families::{parity, product_of_prefix, rademacher_space, ValueTable};
    use crate::model::{CoordFunction, FiniteDistribution, ProductSpace};

    #[test]
    fn parity_three_alternating_sum() {
        let space = rademacher_space(3).unwrap();
        let f = parity(ValueTable::rademacher(3), vec![0, 1, 2]).unwrap();
        let cfg = ExactConfig::default();
        let t = correlation_table(&space, &f, &cfg).unwrap();
        let r = b_and_derivatives(&t);
        let rep = verify_identities(&r, &t, &cfg);
        assert_eq!(rep.get("alternating_j_sum", None).unwrap().residual, 0.0);
        assert!(rep.all_pass(), "{:?}", rep.failures().collect::<Vec<_>>());
    }

    #[test]
    fn truncation_at_n_is_alternating_sum() {
        let space = ProductSpace::iid(
            FiniteDistribution::new(vec![0, 1, 2], vec![0.2, 0.5, 0.3]).unwrap(),
            4,
        )
        .unwrap();
        let f = CoordFunction::new(4, "poly", |v| {
            let x: Vec<f64> = v.iter().map(|&a| a as f64).collect();
            x[0] * x[1] - 0.7 * x[2] + x[1] * x[2] * x[3] + 0.1 * x[3] * x[3]
        });
        let cfg = ExactConfig::default();
        let t = correlation_table(&space, &f, &cfg).unwrap();
        let r = b_and_derivatives(&t);
        let rep = verify_identities(&r, &t, &cfg);
        assert!(rep.all_pass(), "{:?}", rep.failures().collect::<Vec<_>>());
        let a = rep.get("truncated_j_k", Some(4)).unwrap().residual;
        let b = rep.get("alternating_j_sum", None).unwrap().residual;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn prefix_product_passes() {
        let space = rademacher_space(6).unwrap();
        let f = product_of_prefix(ValueTable::new(vec![vec![0.0, 1.0]; 6]), 3).unwrap();
        let cfg = ExactConfig::default();
        let t = correlation_table(&space, &f, &cfg).unwrap();
        assert!(t.exact);
        let r = b_and_derivatives(&t);
        let rep = verify_identities(&r, &t, &cfg);
        assert_eq!(rep.tolerance, EXACT_TOLERANCE);
        assert!(rep.all_pass(), "{:?}", rep.failures().collect::<Vec<_>>());
    }
}
