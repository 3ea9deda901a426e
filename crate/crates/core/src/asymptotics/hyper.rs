use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::quadrature::integrate;

/// Largest `n` accepted by [`hyper_gap_ratio`].
pub const HYPER_MAX_N: usize = 40;
/// Absolute accuracy demanded of the integral.
pub const HYPER_ABS_ERROR: f64 = 1e-8;
/// `2 ln 2 / e`, the lower constant for `R(n)/√n`.
pub const HYPER_RATIO_BOUND: f64 = 2.0 * std::f64::consts::LN_2 / std::f64::consts::E;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperGap {
    pub n: usize,
    pub r: f64,
    /// `R(n) / √n`.
    pub normalised: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// `R(n) = 2√2 ∫_0^{1/√2} sqrt((1/n) Σ_{i=1}^n 2^{i−1} e^{−2^{i−1} u²}) du`,
/// the ratio between the hypercontractive bound and the variance for the
/// dyadic-weight example.
pub fn hyper_gap_ratio(n: usize) -> Result<HyperGap> {
    if n == 0 || n > HYPER_MAX_N {
        return Err(Error::Domain(format!("n = {n} outside 1..={HYPER_MAX_N}")));
    }
    let weights: Vec<f64> = (0..n).map(|i| 2f64.powi(i as i32)).collect();
    let inv_n = 1.0 / n as f64;
    let g = |u: f64| {
        let u2 = u * u;
        (inv_n * weights.iter().map(|w| w * (-w * u2).exp()).sum::<f64>()).sqrt()
    };
    let c = 2.0 * std::f64::consts::SQRT_2;
    let upper = std::f64::consts::FRAC_1_SQRT_2;
    // tolerance on the raw integral, leaving headroom for the prefactor
    let q = integrate(g, 0.0, upper, HYPER_ABS_ERROR / (4.0 * c), 100_000)?;
    let r = c * q.value;
    Ok(HyperGap {
        n,
        r,
        normalised: r / (n as f64).sqrt(),
        error: c * q.error,
        evaluations: q.evaluations,
    })
}
