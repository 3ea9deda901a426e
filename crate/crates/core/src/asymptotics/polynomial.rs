use serde::{Deserialize, Serialize};

use crate::combinatorics::{binom, factorial};
use crate::report::IdentityReport;

/// `G(x) = Σ_j c_j x^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialG {
    pub coeffs: Vec<f64>,
}

impl PolynomialG {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn monomial(d: usize) -> Self {
        let mut c = vec![0.0; d + 1];
        c[d] = 1.0;
        Self::new(c)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// `G^{(k)}`; the zero polynomial once `k` exceeds the degree.
    pub fn derivative(&self, k: usize) -> Self {
        if k > self.degree() {
            return Self::new(vec![0.0]);
        }
        Self::new(
            (k..self.coeffs.len())
                .map(|j| {
                    let falling: f64 = ((j - k + 1)..=j).map(|t| t as f64).product();
                    self.coeffs[j] * falling
                })
                .collect(),
        )
    }

    pub fn square(&self) -> Self {
        let mut c = vec![0.0; 2 * self.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in self.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    /// `E G(Z)` for a standard Gaussian `Z`.
    pub fn gaussian_mean(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * gaussian_moment(j))
            .sum()
    }
}

/// `E Z^m`: `(m−1)!!` for even `m`, zero for odd.
pub fn gaussian_moment(m: usize) -> f64 {
    if m % 2 == 1 {
        return 0.0;
    }
    (1..m).step_by(2).map(|t| t as f64).product()
}

/// `η_k = E[G^{(k)}(Z)²]`, `θ_k = (E G^{(k)}(Z))²`, one-based in `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianTargets {
    pub eta: Vec<f64>,
    pub theta: Vec<f64>,
    pub variance: f64,
    pub report: IdentityReport,
}

impl GaussianTargets {
    pub fn eta_at(&self, k: usize) -> f64 {
        self.eta.get(k - 1).copied().unwrap_or(0.0)
    }

    pub fn theta_at(&self, k: usize) -> f64 {
        self.theta.get(k - 1).copied().unwrap_or(0.0)
    }
}

fn sign(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Exact Gaussian targets up to `kmax`, with the series identities checked
/// on the way (all series are finite for a polynomial).
pub fn gaussian_targets(g: &PolynomialG, kmax: usize) -> GaussianTargets {
    let top = kmax.max(g.degree()).max(1);
    let mut eta = Vec::with_capacity(top);
    let mut theta = Vec::with_capacity(top);
    for k in 1..=top {
        let d = g.derivative(k);
        eta.push(d.square().gaussian_mean());
        theta.push(d.gaussian_mean().powi(2));
    }
    let mean = g.gaussian_mean();
    let variance = g.square().gaussian_mean() - mean * mean;

    // η_i/i! and θ_i/i!, one-based
    let e = |i: usize| eta[i - 1] / factorial(i);
    let t = |i: usize| theta[i - 1] / factorial(i);
    let scale = (1..=top).fold(variance.abs(), |m, i| m.max(e(i)));
    let mut rep = IdentityReport::new(1e-12);

    let alt: f64 = (1..=top).map(|i| sign(i - 1) * e(i)).sum();
    rep.check("eta_series", None, variance - alt, scale);
    let pos: f64 = (1..=top).map(t).sum();
    rep.check("theta_series", None, variance - pos, scale);

    for k in 1..=top {
        let head: f64 = (1..=k).map(|i| sign(i - 1) * e(i)).sum();
        let tail: f64 = (k + 1..=top).map(|j| binom(j - 1, k) * t(j)).sum();
        rep.check(
            "mixed_series",
            Some(k),
            variance - head - sign(k) * tail,
            scale,
        );

        let higher: f64 = (k..=top).map(|j| binom(j, k) * t(j)).sum();
        rep.check("eta_from_theta", Some(k), e(k) - higher, scale);
    }

    for (idx, a) in [0.0f64, 0.25, 0.5, 0.75, 1.0].into_iter().enumerate() {
        let s: f64 = (1..=top)
            .map(|i| sign(i - 1) * a.powi(i as i32) * e(i) + (1.0 - a).powi(i as i32) * t(i))
            .sum();
        rep.check("interpolated_series", Some(idx), variance - s, scale);
    }

    for k in 1..top {
        let lo = t(k + 1);
        let hi = e(k + 1);
        let mid = sign(k) * (variance + (1..=k).map(|i| sign(i) * e(i)).sum::<f64>());
        rep.check(
            "sandwich_eta",
            Some(k),
            (lo - mid).max(mid - hi).max(0.0),
            scale,
        );
        let mid = variance - (1..=k).map(t).sum::<f64>();
        rep.check(
            "sandwich_theta",
            Some(k),
            (lo - mid).max(mid - hi).max(0.0),
            scale,
        );
    }

    eta.truncate(kmax);
    theta.truncate(kmax);
    eta.resize(kmax, 0.0);
    theta.resize(kmax, 0.0);
    GaussianTargets {
        eta,
        theta,
        variance,
        report: rep,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_polynomial() {
        let g = gaussian_targets(&PolynomialG::monomial(1), 3);
        assert_eq!(g.eta, vec![1.0, 0.0, 0.0]);
        assert_eq!(g.theta, vec![1.0, 0.0, 0.0]);
        assert_eq!(g.variance, 1.0);
        assert!(g.report.all_pass());
    }

    #[test]
    fn square() {
        let g = gaussian_targets(&PolynomialG::monomial(2), 2);
        assert_eq!(g.variance, 2.0);
        assert_eq!(g.eta, vec![4.0, 4.0]);
        assert_eq!(g.theta, vec![0.0, 4.0]);
        assert!(g.report.all_pass());
    }

    #[test]
    fn cube() {
        let g = gaussian_targets(&PolynomialG::monomial(3), 1);
        assert_eq!(g.eta[0], 27.0);
    }

    #[test]
    fn mixed_polynomial_identities() {
        let p = PolynomialG::new(vec![0.3, -1.0, 0.5, 2.0, -0.25]);
        let g = gaussian_targets(&p, 6);
        assert!(
            g.report.all_pass(),
            "{:?}",
            g.report.failures().collect::<Vec<_>>()
        );
        for k in 1..=6 {
            assert!(g.eta_at(k) >= g.theta_at(k));
        }
        assert_eq!(g.eta_at(5), 0.0);
    }

    #[test]
    fn derivative_and_eval() {
        let p = PolynomialG::new(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.eval(2.0), 17.0);
        assert_eq!(p.derivative(1).coeffs, vec![2.0, 6.0]);
        assert_eq!(p.derivative(2).coeffs, vec![6.0]);
        assert_eq!(p.derivative(3).coeffs, vec![0.0]);
        assert_eq!(gaussian_moment(4), 3.0);
        assert_eq!(gaussian_moment(6), 15.0);
    }
}
