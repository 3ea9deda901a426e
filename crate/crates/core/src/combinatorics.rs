//! Small exact-ish combinatorial helpers shared by the engines.

/// Binomial coefficient as `f64`. Exact for every result below 2^53.
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round_if_integral()
}

/// Exact binomial coefficient; `None` on overflow of `u128`.
pub fn binom_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i + 1) as u128;
    }
    Some(acc)
}

pub fn ln_binom(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

pub fn factorial(n: usize) -> f64 {
    (2..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// `C(m, b) / 2^m`, the Binomial(m, 1/2) mass at `b`.
///
/// Uses exact integer coefficients up to `m = 60` and log space beyond.
pub fn half_binomial_weight(m: usize, b: usize) -> f64 {
    if b > m {
        return 0.0;
    }
    if m <= 60 {
        let c = binom_u128(m as u64, b as u64).expect("fits for m <= 60");
        c as f64 / 2f64.powi(m as i32)
    } else {
        (ln_binom(m, b) - m as f64 * std::f64::consts::LN_2).exp()
    }
}

/// Iterator over the `k`-subsets of `0..n` as bitmasks, in increasing order.
pub fn subsets_of_size(n: usize, k: usize) -> impl Iterator<Item = u64> {
    let limit = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let first = if k == 0 { 0 } else { (1u64 << k) - 1 };
    let mut next = if k > n { None } else { Some(first) };
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            // Gosper's hack
            let c = cur & cur.wrapping_neg();
            let r = cur.wrapping_add(c);
            if r == 0 {
                None
            } else {
                let nxt = (((r ^ cur) >> 2) / c) | r;
                if nxt > limit || nxt < cur {
                    None
                } else {
                    Some(nxt)
                }
            }
        };
        Some(cur)
    })
}

trait RoundIfIntegral {
    fn round_if_integral(self) -> Self;
}

impl RoundIfIntegral for f64 {
    fn round_if_integral(self) -> f64 {
        let r = self.round();
        if (self - r).abs() <= 1e-9 * r.abs().max(1.0) && r.abs() < 9.0e15 {
            r
        } else {
            self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binom(5, 2), 10.0);
        assert_eq!(binom(3, 5), 0.0);
        assert_eq!(binom(60, 30), 118264581564861424.0);
        assert_eq!(binom_u128(60, 30), Some(118264581564861424));
    }

    #[test]
    fn half_weights_sum_to_one() {
        for m in [0, 1, 7, 60, 61, 120] {
            let s: f64 = (0..=m).map(|b| half_binomial_weight(m, b)).sum();
            assert!((s - 1.0).abs() < 1e-12, "m={m} sum={s}");
        }
    }

    #[test]
    fn gosper_enumerates_all() {
        for n in 0..=8usize {
            for k in 0..=n {
                let v: Vec<u64> = subsets_of_size(n, k).collect();
                assert_eq!(v.len() as f64, binom(n, k), "n={n} k={k}");
                assert!(v
                    .iter()
                    .all(|m| m.count_ones() as usize == k && *m < (1 << n)));
            }
        }
        assert_eq!(subsets_of_size(3, 4).count(), 0);
    }
}
