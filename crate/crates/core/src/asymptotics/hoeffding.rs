use serde::{Deserialize, Serialize};

use crate::combinatorics::{binom, factorial};
use crate::error::{Error, Result};
use crate::exact::{analyze, energy_cross_check, hoeffding_energies, ExactConfig};
use crate::families::rademacher_space;
use crate::model::{CoordFunction, ProductSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingReport {
    pub n: usize,
    pub targets: Vec<f64>,
    /// `A_k` in `S = Σ_k A_k e_k(x)`.
    pub amplitudes: Vec<f64>,
    /// `k! K'_k` recomputed by the exact engine, when `n` is small enough.
    pub achieved: Option<Vec<f64>>,
    pub max_residual: Option<f64>,
    /// Largest gap between the energy route and the correlation-table
    /// route for `B_k`, `J'_k`, `K'_k`.
    pub route_gap: Option<f64>,
    /// Both routes agree within the default tolerance (variance-relative).
    pub routes_agree: bool,
}

/// Elementary symmetric polynomials `e_0..e_n` of ±1 values.
fn elementary_symmetric(x: &[u32], out: &mut [f64]) {
    out.fill(0.0);
    out[0] = 1.0;
    for (i, &a) in x.iter().enumerate() {
        let v = if a == 1 { 1.0 } else { -1.0 };
        for k in (1..=i + 1).rev() {
            out[k] += v * out[k - 1];
        }
    }
}

/// Builds `S` on `n` fair ±1 coordinates with `K_k = k! K'_k` equal to
/// `targets[k−1]` (missing entries are zero): each `k`-th order chaos is
/// `A_k e_k(x)` with `A_k = sqrt(a_k / (k! C(n,k)))`.
pub fn hoeffding_construct(
    targets: &[f64],
    n: usize,
) -> Result<(ProductSpace, CoordFunction, Vec<f64>)> {
    if targets.len() > n {
        return Err(Error::Domain(format!(
            "{} targets for only {n} coordinates",
            targets.len()
        )));
    }
    if let Some(a) = targets.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
        return Err(Error::Domain(format!(
            "target {a} is not a non-negative number"
        )));
    }
    let amplitudes: Vec<f64> = targets
        .iter()
        .enumerate()
        .map(|(i, a)| (a / (factorial(i + 1) * binom(n, i + 1))).sqrt())
        .collect();
    let space = rademacher_space(n)?;
    let amps = amplitudes.clone();
    let f = CoordFunction::new(n, "hoeffding", move |x: &[u32]| {
        let mut e = vec![0.0; x.len() + 1];
        elementary_symmetric(x, &mut e);
        amps.iter().enumerate().map(|(i, a)| a * e[i + 1]).sum()
    });
    Ok((space, f, amplitudes))
}

/// Construction plus a round trip through the exact engine.
pub fn hoeffding_report(targets: &[f64], n: usize, cfg: &ExactConfig) -> Result<HoeffdingReport> {
    let (space, f, amplitudes) = hoeffding_construct(targets, n)?;
    let mut rep = HoeffdingReport {
        n,
        targets: targets.to_vec(),
        amplitudes,
        achieved: None,
        max_residual: None,
        route_gap: None,
        routes_agree: false,
    };
    if space.state_bits() <= cfg.max_state_bits {
        // K_k = k! K'_k multiplies roundoff by k!, so the round trip reads
        // K'_k from the cancellation-free energy route; the table route is
        // compared at its own (variance-relative) accuracy.
        let e = hoeffding_energies(&space, &f, cfg)?;
        let (_, d, _) = analyze(&space, &f, cfg)?;
        let cross = energy_cross_check(&e, &d, cfg.tolerance_for(false));
        rep.route_gap = Some(cross.worst_residual());
        rep.routes_agree = cross.all_pass();
        let achieved: Vec<f64> = e
            .kp()
            .iter()
            .enumerate()
            .map(|(i, k)| factorial(i + 1) * k)
            .collect();
        let resid = (1..=n)
            .map(|k| (achieved[k - 1] - targets.get(k - 1).copied().unwrap_or(0.0)).abs())
            .fold(0.0, f64::max);
        rep.achieved = Some(achieved);
        rep.max_residual = Some(resid);
    }
    Ok(rep)
}
