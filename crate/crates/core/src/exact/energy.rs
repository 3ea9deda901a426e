//! Hoeffding level energies from the value table.
//!
//! Each coordinate's law gets an orthonormal basis whose first element is
//! the constant; changing basis along every axis is an orthogonal map, so
//! the squared coefficients split `E S²` with no cancellation. Summing them
//! by the number of non-constant factors gives `Σ_{|A|=k} E S_A²`, which is
//! `K'_k`; `J'_k` and `B_k` follow as non-negative combinations.

use serde::{Deserialize, Serialize};

use crate::combinatorics::binom;
use crate::error::Result;
use crate::model::{CoordFunction, FiniteDistribution, ProductSpace};
use crate::report::IdentityReport;

use super::decomposition::DecompositionReport;
use super::table::{check_size, StateIndexer};
use super::ExactConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingEnergies {
    pub n: usize,
    /// `levels[k] = Σ_{|A|=k} E S_A²`; `levels[0]` is `(E S)²`.
    pub levels: Vec<f64>,
}

impl HoeffdingEnergies {
    pub fn variance(&self) -> f64 {
        self.levels[1..].iter().sum()
    }

    /// `K'_1..K'_n`.
    pub fn kp(&self) -> Vec<f64> {
        self.levels[1..].to_vec()
    }

    /// `J'_k = Σ_{j≥k} C(j,k) E_j`.
    pub fn jp(&self) -> Vec<f64> {
        (1..=self.n)
            .map(|k| (k..=self.n).map(|j| binom(j, k) * self.levels[j]).sum())
            .collect()
    }

    /// `B_k = Σ_j E_j C(n−k, j−1) / C(n, j)`: the chance that the first of
    /// the `j` coordinates of `A` in a uniform order sits at position `k`.
    pub fn b(&self) -> Vec<f64> {
        let n = self.n;
        (1..=n)
            .map(|k| {
                (1..=n)
                    .map(|j| self.levels[j] * binom(n - k, j - 1) / binom(n, j))
                    .sum()
            })
            .collect()
    }
}

/// Rows of an orthogonal matrix `W` with `W[0] = √p` and
/// `c_j = Σ_a W[j][a] √p_a v(a)` the coefficients of `v` (a Householder
/// reflection sending `e_0` to `√p`).
fn basis(d: &FiniteDistribution) -> Vec<Vec<f64>> {
    let m = d.len();
    let u: Vec<f64> = d.probs().iter().map(|p| p.sqrt()).collect();
    let mut v = u.iter().map(|x| -x).collect::<Vec<_>>();
    v[0] += 1.0;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    (0..m)
        .map(|j| {
            (0..m)
                .map(|a| {
                    let id = if a == j { 1.0 } else { 0.0 };
                    let h = if vv > 0.0 {
                        id - 2.0 * v[a] * v[j] / vv
                    } else {
                        id
                    };
                    h * u[a]
                })
                .collect()
        })
        .collect()
}

pub fn hoeffding_energies(
    space: &ProductSpace,
    f: &CoordFunction,
    cfg: &ExactConfig,
) -> Result<HoeffdingEnergies> {
    f.check_arity(space)?;
    check_size(space, cfg)?;
    let ix = StateIndexer::new(space)?;
    Ok(energies_from_values(space, ix.tabulate(f)))
}

/// Same, from values in [`StateIndexer`] order.
pub fn energies_from_values(space: &ProductSpace, mut values: Vec<f64>) -> HoeffdingEnergies {
    let n = space.n();
    let mut stride = 1;
    let mut buf = Vec::new();
    for d in space.coords() {
        let m = d.len();
        let w = basis(d);
        let block = stride * m;
        for base in (0..values.len()).step_by(block) {
            for off in 0..stride {
                buf.clear();
                buf.extend((0..m).map(|a| values[base + off + a * stride]));
                for (j, row) in w.iter().enumerate() {
                    values[base + off + j * stride] =
                        row.iter().zip(&buf).map(|(x, y)| x * y).sum();
                }
            }
        }
        stride = block;
    }
    let radices: Vec<usize> = space.coords().iter().map(|d| d.len()).collect();
    let mut levels = vec![0.0; n + 1];
    for (idx, c) in values.iter().enumerate() {
        let mut rest = idx;
        let mut level = 0;
        for r in &radices {
            if rest % r != 0 {
                level += 1;
            }
            rest /= r;
        }
        levels[level] += c * c;
    }
    HoeffdingEnergies { n, levels }
}

/// Compares the energy route with the correlation-table route for `B_k`,
/// `J'_k` and `K'_k`.
pub fn energy_cross_check(
    e: &HoeffdingEnergies,
    r: &DecompositionReport,
    tolerance: f64,
) -> IdentityReport {
    let mut rep = IdentityReport::new(tolerance);
    let scale = r.scale();
    rep.check("energy_variance", None, e.variance() - r.variance, scale);
    for (name, a, b) in [
        ("energy_b", e.b(), &r.b),
        ("energy_j", e.jp(), &r.jp),
        ("energy_k", e.kp(), &r.kp),
    ] {
        for k in 1..=e.n {
            rep.check(name, Some(k), a[k - 1] - b[k - 1], scale);
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::analyze;
    use crate::families::{parity, rademacher_space, ValueTable};
    use crate::instances::instance_batch;

    #[test]
    fn parity_is_top_level() {
        let space = rademacher_space(3).unwrap();
        let f = parity(ValueTable::rademacher(3), vec![0, 1, 2]).unwrap();
        let e = hoeffding_energies(&space, &f, &ExactConfig::default()).unwrap();
        assert!(e.levels[..3].iter().all(|x| x.abs() < 1e-15));
        assert!((e.levels[3] - 1.0).abs() < 1e-15);
        let close = |a: Vec<f64>, b: [f64; 3]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-14);
        assert!(close(e.jp(), [3.0, 3.0, 1.0]));
        assert!(close(e.b(), [1.0, 0.0, 0.0]));
    }

    #[test]
    fn agrees_with_table_route() {
        for inst in instance_batch(21, 12, 7).unwrap() {
            let cfg = ExactConfig::default();
            let e = hoeffding_energies(&inst.space, &inst.f, &cfg).unwrap();
            let (_, r, _) = analyze(&inst.space, &inst.f, &cfg).unwrap();
            let rep = energy_cross_check(&e, &r, 1e-9);
            assert!(
                rep.all_pass(),
                "{}: {:?}",
                inst.label,
                rep.failures().collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn zero_mass_atoms_are_harmless() {
        let d = FiniteDistribution::new(vec![0, 1, 2], vec![0.25, 0.0, 0.75]).unwrap();
        let space = ProductSpace::iid(d, 2).unwrap();
        let f = CoordFunction::new(2, "sum", |x| (x[0] + x[1]) as f64);
        let e = hoeffding_energies(&space, &f, &ExactConfig::default()).unwrap();
        // each coordinate: values {0, 2} w.p. {1/4, 3/4}, variance 3/4
        assert!((e.levels[1] - 1.5).abs() < 1e-14);
        assert!(e.levels[2].abs() < 1e-14);
        assert!((e.levels[0] - 9.0).abs() < 1e-13);
    }
}
