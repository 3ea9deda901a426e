use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CoordFunction, ProductSpace};

use super::ExactConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TalagrandReport {
    pub variance: f64,
    /// `¼ Σ_j (1 + 2/n − (2/(n ln 2)) ln(‖τ_j‖₂/‖τ_j‖₁)) ‖τ_j‖₂²`.
    pub rhs: f64,
    /// `Σ_j ‖τ_j‖₂² / (1 + ln(‖τ_j‖₂/‖τ_j‖₁))`, the optimal-order sum
    /// without its constant.
    pub talagrand_sum: f64,
    pub tau_l1: Vec<f64>,
    pub tau_l2: Vec<f64>,
    pub pass: bool,
}

fn check_fair_bits(space: &ProductSpace) -> Result<()> {
    for (i, d) in space.coords().iter().enumerate() {
        let mut atoms = d.atoms().to_vec();
        atoms.sort_unstable();
        if atoms != [0, 1] || d.probs().iter().any(|&p| (p - 0.5).abs() > 1e-12) {
            return Err(Error::Precondition(format!(
                "coordinate {i} is not a fair bit on {{0, 1}}"
            )));
        }
    }
    Ok(())
}

/// Exact check of the weak `L1–L2` bound on the fair cube, for functions
/// whose increments `τ_j S = S(x_j=0) − S(x_j=1)` take values in
/// `{−1, 0, 1}`.
pub fn weak_talagrand_check(
    space: &ProductSpace,
    f: &CoordFunction,
    cfg: &ExactConfig,
) -> Result<TalagrandReport> {
    f.check_arity(space)?;
    check_fair_bits(space)?;
    let n = space.n();
    if n as f64 > cfg.max_state_bits + 1e-9 {
        return Err(Error::SpaceTooLarge {
            required: n as f64,
            allowed: cfg.max_state_bits,
        });
    }
    let count = 1usize << n;
    let mut buf = vec![0u32; n];
    let values: Vec<f64> = (0..count)
        .map(|x| {
            for (i, b) in buf.iter_mut().enumerate() {
                *b = ((x >> i) & 1) as u32;
            }
            f.eval(&buf)
        })
        .collect();
    let mean = values.iter().sum::<f64>() / count as f64;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count as f64;

    let mut tau_l1 = vec![0.0; n];
    let mut tau_l2 = vec![0.0; n];
    for j in 0..n {
        let (mut s1, mut s2) = (0.0, 0.0);
        // τ_j does not depend on x_j: average over the half with x_j = 0
        for x in (0..count).filter(|x| x & (1 << j) == 0) {
            let tau = values[x] - values[x | (1 << j)];
            if tau != 0.0 && (tau.abs() - 1.0).abs() > 1e-12 {
                return Err(Error::Precondition(format!(
                    "increment of coordinate {j} takes value {tau}, not in {{-1, 0, 1}}"
                )));
            }
            s1 += tau.abs();
            s2 += tau * tau;
        }
        let half = (count / 2) as f64;
        tau_l1[j] = s1 / half;
        tau_l2[j] = (s2 / half).sqrt();
    }

    let nf = n as f64;
    let mut rhs = 0.0;
    let mut talagrand_sum = 0.0;
    for j in 0..n {
        if tau_l1[j] == 0.0 {
            continue;
        }
        let log_ratio = (tau_l2[j] / tau_l1[j]).ln();
        let l2sq = tau_l2[j] * tau_l2[j];
        rhs += 0.25 * (1.0 + 2.0 / nf - 2.0 / (nf * std::f64::consts::LN_2) * log_ratio) * l2sq;
        talagrand_sum += l2sq / (1.0 + log_ratio);
    }
    let tol = cfg.tolerance_for(true) * variance.abs().max(1.0);
    Ok(TalagrandReport {
        variance,
        rhs,
        talagrand_sum,
        tau_l1,
        tau_l2,
        pass: variance <= rhs + tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{parity, product_of_prefix, rademacher_space, ValueTable};

    fn bits(n: usize) -> ValueTable {
        ValueTable::new(vec![vec![0.0, 1.0]; n])
    }

    #[test]
    fn dictator() {
        let space = rademacher_space(4).unwrap();
        let f = parity(bits(4), vec![0]).unwrap();
        let r = weak_talagrand_check(&space, &f, &ExactConfig::default()).unwrap();
        assert_eq!(r.variance, 0.25);
        assert!(r.rhs >= 0.25 && r.pass);
        assert_eq!(r.tau_l1, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn constant_both_zero() {
        let space = rademacher_space(3).unwrap();
        let f = CoordFunction::new(3, "c", |_| 2.0);
        let r = weak_talagrand_check(&space, &f, &ExactConfig::default()).unwrap();
        assert_eq!((r.variance, r.rhs), (0.0, 0.0));
        assert!(r.pass);
    }

    #[test]
    fn prefix_product_norms() {
        let n = 10;
        let space = rademacher_space(n).unwrap();
        let f = product_of_prefix(bits(n), n / 2).unwrap();
        let r = weak_talagrand_check(&space, &f, &ExactConfig::default()).unwrap();
        let l1 = 0.5f64.powi(n as i32 / 2 - 1);
        for j in 0..n / 2 {
            assert!((r.tau_l1[j] - l1).abs() < 1e-15);
            assert!((r.tau_l2[j] - l1.sqrt()).abs() < 1e-15);
        }
        assert!(r.pass);
    }

    #[test]
    fn rejects_non_boolean_increments() {
        let space = rademacher_space(3).unwrap();
        let f = CoordFunction::new(3, "two", |v| 2.0 * v[1] as f64);
        match weak_talagrand_check(&space, &f, &ExactConfig::default()) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("coordinate 1")),
            other => panic!("{other:?}"),
        }
    }
}
