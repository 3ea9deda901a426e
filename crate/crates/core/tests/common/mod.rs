//! Brute-force oracles written straight from the permutation-average
//! definitions, sharing no code with the engine beyond `CoordFunction`.
#![allow(dead_code)]

use varjack::{CoordFunction, ProductSpace};

/// All `k`-permutations of `0..n` (ordered, injective).
fn arrangements(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !cur.contains(&i) {
                cur.push(i);
                go(n, k, cur, out);
                cur.pop();
            }
        }
    }
    go(n, k, &mut cur, &mut out);
    out
}

/// Every configuration of the coordinates in `coords`, with its probability.
fn configurations(space: &ProductSpace, coords: &[usize]) -> Vec<(Vec<u32>, f64)> {
    let mut out = vec![(Vec::new(), 1.0)];
    for &i in coords {
        let d = space.coord(i);
        let mut next = Vec::new();
        for (vals, p) in &out {
            for (a, q) in d.atoms().iter().zip(d.probs()) {
                let mut v = vals.clone();
                v.push(*a);
                next.push((v, p * q));
            }
        }
        out = next;
    }
    out
}

fn all_coords(space: &ProductSpace) -> Vec<usize> {
    (0..space.n()).collect()
}

/// `B_k = (1/n!) Σ_σ E[S(X) (S^{σ1..σ(k−1)} − S^{σ1..σk})]`, averaging over
/// the ordered prefix of length `k` (the rest of `σ` does not enter).
pub fn literal_b(space: &ProductSpace, f: &CoordFunction, k: usize) -> f64 {
    let n = space.n();
    let xs = configurations(space, &all_coords(space));
    let perms = arrangements(n, k);
    let mut total = 0.0;
    for sigma in &perms {
        let xps = configurations(space, sigma);
        for (x, px) in &xs {
            let s = f.eval(x);
            for (xp, pp) in &xps {
                let mut y = x.clone();
                for (t, &i) in sigma[..k - 1].iter().enumerate() {
                    y[i] = xp[t];
                }
                let before = f.eval(&y);
                y[sigma[k - 1]] = xp[k - 1];
                total += px * pp * s * (before - f.eval(&y));
            }
        }
    }
    total / perms.len() as f64
}

/// `Δ_A S(x, x') = Σ_{B ⊆ A} (−1)^{|B|} S(x with x'_B)`, `x'` given on `A`.
fn delta(f: &CoordFunction, x: &[u32], a: &[usize], xa: &[u32]) -> f64 {
    let mut acc = 0.0;
    let mut y = x.to_vec();
    for mask in 0u32..(1 << a.len()) {
        for (t, &i) in a.iter().enumerate() {
            y[i] = if mask >> t & 1 == 1 { xa[t] } else { x[i] };
        }
        let sign = if mask.count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        acc += sign * f.eval(&y);
    }
    acc
}

/// `D^l B_k = (1/(2^{l+1} n!)) Σ_σ E[(Δ_{σ1..σ(l+1)} S) (Δ_{σ1..σ(l+1)} S)^{σ(l+2)..σ(k+l)}]`,
/// where the outer superscript resamples those coordinates from a third
/// independent copy.
pub fn literal_db(space: &ProductSpace, f: &CoordFunction, l: usize, k: usize) -> f64 {
    let n = space.n();
    assert!(k >= 1 && k + l <= n);
    let xs = configurations(space, &all_coords(space));
    let perms = arrangements(n, k + l);
    // Only the sets {σ_1..σ_{l+1}} and {σ_{l+2}..σ_{k+l}} matter; group
    // the arrangements by that pair and weight by multiplicity.
    let mut groups: std::collections::BTreeMap<(Vec<usize>, Vec<usize>), usize> =
        Default::default();
    for sigma in &perms {
        let mut a = sigma[..l + 1].to_vec();
        let mut c = sigma[l + 1..].to_vec();
        a.sort_unstable();
        c.sort_unstable();
        *groups.entry((a, c)).or_default() += 1;
    }
    let mut total = 0.0;
    for ((a, c), mult) in &groups {
        let (a, c) = (a.as_slice(), c.as_slice());
        let mult = *mult as f64;
        let xas = configurations(space, a);
        let xcs = configurations(space, c);
        for (x, px) in &xs {
            for (xa, pa) in &xas {
                let d = delta(f, x, a, xa);
                if d == 0.0 {
                    continue;
                }
                for (xc, pc) in &xcs {
                    let mut z = x.clone();
                    for (t, &i) in c.iter().enumerate() {
                        z[i] = xc[t];
                    }
                    total += mult * px * pa * pc * d * delta(f, &z, a, xa);
                }
            }
        }
    }
    total / (perms.len() as f64 * 2f64.powi(l as i32 + 1))
}

/// `Var S` by direct enumeration.
pub fn literal_variance(space: &ProductSpace, f: &CoordFunction) -> f64 {
    let xs = configurations(space, &all_coords(space));
    let m: f64 = xs.iter().map(|(x, p)| p * f.eval(x)).sum();
    xs.iter().map(|(x, p)| p * (f.eval(x) - m).powi(2)).sum()
}
