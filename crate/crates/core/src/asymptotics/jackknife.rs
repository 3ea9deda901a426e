use serde::{Deserialize, Serialize};

use crate::combinatorics::{binom, factorial, half_binomial_weight};
use crate::error::{Error, Result};
use crate::families::rademacher_space;
use crate::model::{CoordFunction, ProductSpace};

use super::polynomial::{gaussian_targets, PolynomialG};

/// `J_k = k! J'_k` and `K_k = k! K'_k` for `S = G((x_1 + … + x_n)/√n)`,
/// one-based in `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RademacherJackknife {
    pub n: usize,
    pub j: Vec<f64>,
    pub k: Vec<f64>,
}

/// `Σ_i C(k,i) (−1)^i h(2i − k) / 2^k`, the `k`-th symmetric difference
/// of `h` with unit steps in `±1`.
fn signed_difference(k: usize, h: impl Fn(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..=k {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc += s * binom(k, i) * h(2.0 * i as f64 - k as f64);
    }
    acc / 2f64.powi(k as i32)
}

/// Closed forms for a function of a normalised Rademacher sum: only the
/// sum `R` of the `n − k` untouched signs matters, so everything reduces
/// to binomial averages.
pub fn rademacher_jackknife(g: &PolynomialG, n: usize, kmax: usize) -> Result<RademacherJackknife> {
    if n == 0 || kmax == 0 || kmax > n {
        return Err(Error::Domain(format!(
            "need 1 <= kmax <= n, got kmax = {kmax}, n = {n}"
        )));
    }
    let root = (n as f64).sqrt();
    let mut j = Vec::with_capacity(kmax);
    let mut kk = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        let m = n - k;
        let rest: Vec<(f64, f64)> = (0..=m)
            .map(|b| (half_binomial_weight(m, b), 2.0 * b as f64 - m as f64))
            .collect();
        let jp: f64 = rest
            .iter()
            .map(|&(w, r)| w * signed_difference(k, |u| g.eval((u + r) / root)).powi(2))
            .sum();
        let gbar = |u: f64| {
            rest.iter()
                .map(|&(w, r)| w * g.eval((u + r) / root))
                .sum::<f64>()
        };
        let kp = signed_difference(k, gbar).powi(2);
        let c = binom(n, k) * factorial(k);
        j.push(c * jp);
        kk.push(c * kp);
    }
    Ok(RademacherJackknife { n, j, k: kk })
}

/// `G((x_1 + … + x_n)/√n)` on fair ±1 coordinates, for cross-checks with
/// the exact engine.
pub fn rademacher_sum_function(g: &PolynomialG, n: usize) -> (ProductSpace, CoordFunction) {
    let space = rademacher_space(n).expect("fair bits are a valid law");
    let g = g.clone();
    let root = (n as f64).sqrt();
    let f = CoordFunction::new(n, "rademacher_sum", move |x: &[u32]| {
        let s: f64 = x.iter().map(|&a| if a == 1 { 1.0 } else { -1.0 }).sum();
        g.eval(s / root)
    });
    (space, f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub k: usize,
    pub j: f64,
    pub eta: f64,
    pub kk: f64,
    pub theta: f64,
    pub j_gap: f64,
    pub k_gap: f64,
}

/// `J_k(n)` against `η_k` and `K_k(n)` against `θ_k` over a grid of `n`.
pub fn convergence_table(
    g: &PolynomialG,
    ns: &[usize],
    kmax: usize,
) -> Result<Vec<ConvergenceRow>> {
    let targets = gaussian_targets(g, kmax);
    let mut rows = Vec::new();
    for &n in ns {
        let jk = rademacher_jackknife(g, n, kmax)?;
        for k in 1..=kmax {
            let (j, kk) = (jk.j[k - 1], jk.k[k - 1]);
            let (eta, theta) = (targets.eta_at(k), targets.theta_at(k));
            rows.push(ConvergenceRow {
                n,
                k,
                j,
                eta,
                kk,
                theta,
                j_gap: (j - eta).abs(),
                k_gap: (kk - theta).abs(),
            });
        }
    }
    Ok(rows)
}

/// Whether, for each `k`, both gaps are non-increasing along the rows'
/// order of `n`. Gaps that are zero in exact arithmetic only carry
/// roundoff, so each step may grow by `slack · max(1, η_k, θ_k)`.
pub fn gaps_decrease(rows: &[ConvergenceRow], slack: f64) -> bool {
    let kmax = rows.iter().map(|r| r.k).max().unwrap_or(0);
    (1..=kmax).all(|k| {
        let seq: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.k == k).collect();
        seq.windows(2).all(|w| {
            let room = slack * w[1].eta.max(w[1].theta).max(1.0);
            w[1].j_gap <= w[0].j_gap + room && w[1].k_gap <= w[0].k_gap + room
        })
    })
}
