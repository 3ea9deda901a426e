//! The interpolation route to the variance.
//!
//! With coordinates switched to independent copies at uniform times, the
//! overlap `E[S(X^(0)) S(X^(α))]` is a polynomial in `α`. Both it and the
//! per-coordinate overlaps of `d_i S` are held exactly in the basis
//! `α^s (1−α)^{d−s}`, where division by `1−α` and integration over `[0,1]`
//! are closed-form.

use serde::{Deserialize, Serialize};

use crate::combinatorics::binom;
use crate::error::Result;
use crate::model::{CoordFunction, ProductSpace};
use crate::report::IdentityReport;

use super::table::{correlation_table_from_values, CorrelationTable, StateIndexer};
use super::ExactConfig;

/// `P(α) = Σ_s c_s α^s (1−α)^{d−s}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernsteinPoly {
    pub coeffs: Vec<f64>,
}

impl BernsteinPoly {
    /// `Σ_γ α^{|γ|} (1−α)^{n−|γ|} table[γ]`.
    pub fn from_subset_table(n: usize, table: &[f64]) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        for (mask, v) in table.iter().enumerate() {
            coeffs[mask.count_ones() as usize] += v;
        }
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, alpha: f64) -> f64 {
        let d = self.degree() as i32;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(s, c)| c * alpha.powi(s as i32) * (1.0 - alpha).powi(d - s as i32))
            .sum()
    }

    /// Quotient by `(1−α)` and the remainder, which is the `α^d`
    /// coefficient: every other basis element carries the factor.
    pub fn divide_one_minus(&self) -> (BernsteinPoly, f64) {
        let d = self.degree();
        if d == 0 {
            return (BernsteinPoly { coeffs: vec![0.0] }, self.coeffs[0]);
        }
        (
            BernsteinPoly {
                coeffs: self.coeffs[..d].to_vec(),
            },
            self.coeffs[d],
        )
    }

    /// `∫_0^1 P`, using `∫ α^a (1−α)^b = a! b! / (a+b+1)!`.
    pub fn integrate(&self) -> f64 {
        let d = self.degree();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(s, c)| c / ((d + 1) as f64 * binom(d, s)))
            .sum()
    }
}

/// Values of `d_i S = S − E_i S` in state order.
fn d_i_values(space: &ProductSpace, values: &[f64], i: usize) -> Vec<f64> {
    let stride: usize = space.coords()[..i].iter().map(|d| d.len()).product();
    let probs = space.coord(i).probs();
    let radix = probs.len();
    let mut out = values.to_vec();
    for (hi, chunk) in out.chunks_exact_mut(stride * radix).enumerate() {
        let src = &values[hi * stride * radix..(hi + 1) * stride * radix];
        for lo in 0..stride {
            let mean: f64 = probs
                .iter()
                .enumerate()
                .map(|(d, p)| p * src[d * stride + lo])
                .sum();
            for d in 0..radix {
                chunk[d * stride + lo] -= mean;
            }
        }
    }
    out
}

/// Rebuilds `Var S` from the per-coordinate overlaps of `d_i S`, and checks
/// the endpoint and Beta-binomial forms along the way.
pub fn interpolation_check(
    t: &CorrelationTable,
    space: &ProductSpace,
    f: &CoordFunction,
    cfg: &ExactConfig,
) -> Result<IdentityReport> {
    let n = t.n;
    let var = t.variance();
    let scale = t.second_moment.abs();
    let mut rep = IdentityReport::new(cfg.tolerance_for(t.exact));

    let rho = BernsteinPoly::from_subset_table(n, &t.corr);
    rep.check(
        "overlap_endpoints",
        None,
        rho.eval(0.0) - rho.eval(1.0) - var,
        scale,
    );

    let indexer = StateIndexer::new(space)?;
    let values = indexer.tabulate(f);
    let mut total = 0.0;
    let mut remainder: f64 = 0.0;
    let mut vanishing: f64 = 0.0;
    for i in 0..n {
        let di = correlation_table_from_values(space, d_i_values(space, &values, i), cfg)?;
        for (mask, &v) in di.corr.iter().enumerate() {
            if mask & (1 << i) != 0 {
                vanishing = vanishing.max(v.abs());
            }
        }
        let (q, rem) = BernsteinPoly::from_subset_table(n, &di.corr).divide_one_minus();
        remainder = remainder.max(rem.abs());
        total += q.integrate();
    }
    rep.check("d_i_overlap_vanishes_on_i", None, vanishing, scale);
    rep.check("division_remainder", None, remainder, scale);
    rep.check("interpolated_variance", None, total - var, scale);

    // Σ_k ∫ n C(n−1,k) α^k (1−α)^{n−1−k} dα · B_{k+1} against Σ B_{k+1}
    let levels = t.level_means();
    let b: Vec<f64> = (0..n).map(|k| levels[k] - levels[k + 1]).collect();
    let weighted: f64 = (0..n)
        .map(|k| {
            let mut coeffs = vec![0.0; n];
            coeffs[k] = n as f64 * binom(n - 1, k);
            BernsteinPoly { coeffs }.integrate() * b[k]
        })
        .sum();
    rep.check(
        "beta_binomial_weights",
        None,
        weighted - b.iter().sum::<f64>(),
        scale,
    );
    Ok(rep)
}
