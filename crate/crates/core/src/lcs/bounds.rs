use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{correlation_table, ExactConfig, StateIndexer};
use crate::mc::{sample_with, variance_estimate, Estimate, EstimatorConfig};
use crate::model::FiniteDistribution;

use super::estimators::{blast_lcs_estimate, blast_lcs_exact, lcs_variance_estimate, LcsModel};
use super::lcs_length;

/// Largest `2n · log2 m` handled by enumeration in the reports.
const EXACT_BITS: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcsVarianceReport {
    pub n: usize,
    /// Exact `Var LC_n` when the space is small enough to enumerate.
    pub exact_variance: Option<f64>,
    /// Monte Carlo `Var LC_n` otherwise.
    pub variance: Option<Estimate>,
    /// Efron–Stein: `n ((1 − Σp_x²) + (1 − Σp_y²)) / 2`.
    pub efron_stein_bound: f64,
    /// `(1 − Σp²) n / 2`, valid under the symmetry condition; `n/4` for
    /// uniform binary words.
    pub halved_bound: f64,
    /// Whether the symmetry condition holds, so that `halved_bound` applies.
    pub symmetric: bool,
    /// `2n · B̂_{2n}` for binary alphabets.
    pub last_b_lower_bound: Option<Estimate>,
    /// The applicable upper bound holds (exactly, or within 4 stderr).
    pub pass: bool,
}

impl LcsVarianceReport {
    pub fn applicable_bound(&self) -> f64 {
        if self.symmetric {
            self.halved_bound
        } else {
            self.efron_stein_bound
        }
    }
}

/// `n log2 |X| + n log2 |Y|`, the size of the enumeration.
fn exact_bits(model: &LcsModel) -> f64 {
    let n = model.n as f64;
    n * ((model.x_dist.len() as f64).log2() + (model.y_dist.len() as f64).log2())
}

pub fn exact_lcs_variance(model: &LcsModel, cfg: &ExactConfig) -> Result<f64> {
    Ok(correlation_table(&model.space()?, &model.function()?, cfg)?.variance())
}

/// Checks `Var LC_n` against the halved bound, exactly for small spaces and
/// by simulation otherwise.
pub fn upper_bound_report(model: &LcsModel, cfg: &EstimatorConfig) -> Result<LcsVarianceReport> {
    let n = model.n as f64;
    let cx = 1.0 - model.x_dist.collision();
    let cy = 1.0 - model.y_dist.collision();
    let symmetric = model.is_symmetric();
    let mut rep = LcsVarianceReport {
        n: model.n,
        exact_variance: None,
        variance: None,
        efron_stein_bound: n * (cx + cy) / 2.0,
        halved_bound: cx * n / 2.0,
        symmetric,
        last_b_lower_bound: None,
        pass: false,
    };
    let bound = rep.applicable_bound();
    if exact_bits(model) <= EXACT_BITS {
        let v = exact_lcs_variance(model, &ExactConfig::default())?;
        rep.exact_variance = Some(v);
        rep.pass = v <= bound + 1e-12;
    } else {
        let v = lcs_variance_estimate(model, cfg)?;
        rep.variance = Some(v);
        rep.pass = v.mean <= bound + 4.0 * v.stderr;
    }
    if let Ok(b) = blast_lcs_estimate(model, cfg) {
        rep.last_b_lower_bound = Some(b.variance_lower_bound);
    }
    Ok(rep)
}

/// `2 p0 (1−p0) ((γ_low(p0) − γ½) / (½ − p0))²` with
/// `γ_low(p) = p² + (1−p)²`, a certified lower bound on `γ(p0)`.
pub fn varsup_constant(p0: f64, gamma_half_upper: f64) -> Result<f64> {
    if !(p0 > 0.0 && p0 < 0.5) {
        return Err(Error::Domain(format!("p0 = {p0} outside (0, 1/2)")));
    }
    let gamma_low = p0 * p0 + (1.0 - p0) * (1.0 - p0);
    if gamma_low < gamma_half_upper {
        return Err(Error::Precondition(format!(
            "gamma lower bound {gamma_low} at p0 = {p0} does not exceed {gamma_half_upper}"
        )));
    }
    let slope = (gamma_low - gamma_half_upper) / (0.5 - p0);
    Ok(2.0 * p0 * (1.0 - p0) * slope * slope)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmittedLetterReport {
    /// `E LC_n − E LC_{n−1,n}` by coupled sampling.
    pub delta_e: Estimate,
    /// Unbiased estimate of `(ΔE)²` from two independent coupled draws.
    pub delta_e_squared: Estimate,
    pub p: f64,
    /// `¼ ΔE p · 2n`, the form displayed with the inequality.
    pub linear_bound: Estimate,
    /// `¼ ΔE² p · 2n`, the form the Cauchy–Schwarz step yields.
    pub quadratic_bound: Estimate,
    pub variance: Estimate,
}

fn omitted_p(model: &LcsModel, omitted: u32) -> Result<f64> {
    if model.y_dist.contains(omitted) {
        return Err(Error::Precondition(format!(
            "letter {omitted} occurs in the y alphabet"
        )));
    }
    let p = model.x_dist.prob_of(omitted);
    if p <= 0.0 {
        return Err(Error::Precondition(format!(
            "letter {omitted} has probability 0 in the x alphabet"
        )));
    }
    Ok(p)
}

/// Drop-the-last-letter effect on one draw.
fn coupled_gap(model: &LcsModel, z: &[u32]) -> f64 {
    let n = model.n;
    let full = lcs_length(&z[..n], &z[n..]);
    let short = lcs_length(&z[..n - 1], &z[n..]);
    (full - short) as f64
}

/// Lower bounds on `Var LC_n` when `x` may use a letter `y` never does.
pub fn omitted_letter_bound(
    model: &LcsModel,
    omitted: u32,
    cfg: &EstimatorConfig,
) -> Result<OmittedLetterReport> {
    let p = omitted_p(model, omitted)?;
    let len = 2 * model.n;
    let draws: Vec<(f64, f64, f64)> = sample_with(
        cfg,
        || vec![0u32; len],
        |rng, z| {
            model.draw(rng, z);
            let lc = model.lcs(z);
            let d1 = coupled_gap(model, z);
            model.draw(rng, z);
            let d2 = coupled_gap(model, z);
            (lc, d1, d2)
        },
    )?;
    let lcs: Vec<f64> = draws.iter().map(|t| t.0).collect();
    let d: Vec<f64> = draws.iter().map(|t| t.1).collect();
    let dd: Vec<f64> = draws.iter().map(|t| t.1 * t.2).collect();
    let delta_e = Estimate::from_samples(&d);
    let delta_e_squared = Estimate::from_samples(&dd);
    let scale = 0.25 * p * len as f64;
    Ok(OmittedLetterReport {
        delta_e,
        delta_e_squared,
        p,
        linear_bound: delta_e.scaled(scale),
        quadratic_bound: delta_e_squared.scaled(scale),
        variance: variance_estimate(&lcs),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmittedLetterExact {
    pub b_last: f64,
    pub delta_e: f64,
    /// `¼ ΔE p`.
    pub linear_form: f64,
    /// `¼ ΔE² p`.
    pub quadratic_form: f64,
    pub variance: f64,
}

/// Exact counterpart for small `n`: the last `B` from the engine and `ΔE`
/// by enumeration.
pub fn omitted_letter_exact(
    model: &LcsModel,
    omitted: u32,
    cfg: &ExactConfig,
) -> Result<OmittedLetterExact> {
    let p = omitted_p(model, omitted)?;
    let space = model.space()?;
    let t = correlation_table(&space, &model.function()?, cfg)?;
    let b_last = blast_lcs_exact(model, cfg)?;
    let ix = StateIndexer::new(&space)?;
    let mut z = vec![0u32; 2 * model.n];
    let mut delta_e = 0.0;
    for idx in 0..ix.count() {
        ix.decode(idx, &mut z);
        let w: f64 = z
            .iter()
            .enumerate()
            .map(|(k, &a)| model.coord_dist(k).prob_of(a))
            .product();
        delta_e += w * coupled_gap(model, &z);
    }
    Ok(OmittedLetterExact {
        b_last,
        delta_e,
        linear_form: 0.25 * delta_e * p,
        quadratic_form: 0.25 * delta_e * delta_e * p,
        variance: t.variance(),
    })
}

/// Uniform law on `m` letters plus an extra letter with probability `p`.
pub fn with_omitted_letter(m: u32, p: f64) -> Result<FiniteDistribution> {
    let rest = (1.0 - p) / m as f64;
    let mut probs = vec![rest; m as usize];
    probs.push(p);
    FiniteDistribution::new((0..=m).collect(), probs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn varsup_values() {
        let v = varsup_constant(0.096, 0.8263).unwrap();
        // hand evaluation: γ_low = 0.826432, slope = 0.000132/0.404
        let hand = 2.0 * 0.096 * 0.904 * (0.000132f64 / 0.404).powi(2);
        assert!((v - hand).abs() < 1e-20);
        assert!(v >= 1.8e-8);
        let w = varsup_constant(0.05, 0.8263).unwrap();
        assert!(w > v);
        assert!(varsup_constant(0.2, 0.8263).is_err());
        assert!(varsup_constant(0.6, 0.8263).is_err());
    }

    #[test]
    fn varsup_boundary_is_zero() {
        let p0: f64 = 0.1;
        let g = p0 * p0 + (1.0 - p0) * (1.0 - p0);
        assert_eq!(varsup_constant(p0, g).unwrap(), 0.0);
    }

    #[test]
    fn always_omitted_gives_zero() {
        let x = FiniteDistribution::new(vec![0, 1, 2], vec![0.0, 0.0, 1.0]).unwrap();
        let y = FiniteDistribution::uniform(2).unwrap();
        let model = LcsModel::new(6, x, y).unwrap();
        let r = omitted_letter_bound(&model, 2, &EstimatorConfig::new(200, 3)).unwrap();
        assert_eq!(r.delta_e.mean, 0.0);
        assert_eq!(r.linear_bound.mean, 0.0);
        assert_eq!(r.quadratic_bound.mean, 0.0);
    }

    #[test]
    fn omitted_letter_must_be_absent_from_y() {
        let model = LcsModel::uniform(4, 3).unwrap();
        assert!(omitted_letter_bound(&model, 2, &EstimatorConfig::new(10, 0)).is_err());
    }

    #[test]
    fn exact_upper_bound_small() {
        let model = LcsModel::uniform(4, 2).unwrap();
        let r = upper_bound_report(&model, &EstimatorConfig::new(1000, 1)).unwrap();
        assert!(r.symmetric);
        assert_eq!(r.halved_bound, 1.0);
        assert!(r.exact_variance.unwrap() <= 1.0);
        assert!(r.pass);
    }
}
