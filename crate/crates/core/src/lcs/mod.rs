//! Longest common subsequences of random words and the perturbation
//! estimators built on them.

mod bounds;
mod estimators;

pub use bounds::{
    exact_lcs_variance, omitted_letter_bound, omitted_letter_exact, upper_bound_report,
    varsup_constant, with_omitted_letter, LcsVarianceReport, OmittedLetterExact,
    OmittedLetterReport,
};
pub use estimators::{
    b1_lcs_estimate, blast_lcs_estimate, blast_lcs_exact, cell_series, cell_statistic,
    lcs_variance_estimate, paired_letter_exact, square_of_mean, BlastReport, CellReport,
    CellSeries, LcsModel, PerturbationSpec, SeriesRow,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FiniteDistribution;

/// Longest input the brute-force oracle accepts.
pub const BRUTE_MAX_LEN: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    pub letters: Vec<u32>,
}

impl Word {
    pub fn new(letters: Vec<u32>) -> Self {
        Self { letters }
    }

    /// Decimal digits, e.g. `"1010"`.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .ok_or_else(|| Error::Config(format!("letter {c:?} is not a digit")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn check_alphabet(&self, alphabet: &FiniteDistribution) -> Result<()> {
        match self.letters.iter().position(|&c| !alphabet.contains(c)) {
            None => Ok(()),
            Some(i) => Err(Error::InvalidConfiguration(format!(
                "letter {} at position {i} is outside the alphabet",
                self.letters[i]
            ))),
        }
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.letters {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Two-row dynamic programme; the reference definition.
pub fn lcs_dp(x: &[u32], y: &[u32]) -> usize {
    let mut prev = vec![0usize; y.len() + 1];
    let mut cur = vec![0usize; y.len() + 1];
    for &a in x {
        for (j, &b) in y.iter().enumerate() {
            cur[j + 1] = if a == b {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[y.len()]
}

/// Bit-parallel LCS over 64-bit words.
///
/// Bits of `V` index positions of `x`; for each letter `c` of `y`,
/// `U = V & M[c]`, `V = (V + U) | (V − U)`. The LCS is the number of
/// cleared bits of `V` at the end.
pub fn lcs_bitparallel(x: &[u32], y: &[u32]) -> usize {
    let m = x.len();
    if m == 0 || y.is_empty() {
        return 0;
    }
    let words = m.div_ceil(64);
    let sigma = *x.iter().max().unwrap() as usize + 1;
    let mut masks = vec![0u64; sigma * words];
    for (i, &c) in x.iter().enumerate() {
        masks[c as usize * words + i / 64] |= 1 << (i % 64);
    }
    let mut v = vec![u64::MAX; words];
    let tail_bits = m % 64;
    if tail_bits != 0 {
        v[words - 1] = (1u64 << tail_bits) - 1;
    }
    let top_mask = v[words - 1];
    for &c in y {
        let c = c as usize;
        if c >= sigma {
            continue;
        }
        let mk = &masks[c * words..(c + 1) * words];
        let mut carry = 0u64;
        let mut borrow = 0u64;
        for w in 0..words {
            let u = v[w] & mk[w];
            let (s1, c1) = v[w].overflowing_add(u);
            let (s2, c2) = s1.overflowing_add(carry);
            carry = (c1 | c2) as u64;
            let (d1, b1) = v[w].overflowing_sub(u);
            let (d2, b2) = d1.overflowing_sub(borrow);
            borrow = (b1 | b2) as u64;
            v[w] = s2 | d2;
        }
        v[words - 1] &= top_mask;
    }
    m - v.iter().map(|w| w.count_ones() as usize).sum::<usize>()
}

/// LCS length; bit-parallel with the shorter word along the bit axis.
pub fn lcs_length(x: &[u32], y: &[u32]) -> usize {
    if x.len() <= y.len() {
        lcs_bitparallel(x, y)
    } else {
        lcs_bitparallel(y, x)
    }
}

/// LCS length after checking both words against their alphabets.
pub fn lcs_length_checked(
    x: &Word,
    y: &Word,
    x_alphabet: &FiniteDistribution,
    y_alphabet: &FiniteDistribution,
) -> Result<usize> {
    x.check_alphabet(x_alphabet)?;
    y.check_alphabet(y_alphabet)?;
    Ok(lcs_length(&x.letters, &y.letters))
}

fn is_subsequence(sub: impl Iterator<Item = u32>, y: &[u32]) -> bool {
    let mut it = y.iter();
    sub.into_iter().all(|c| it.any(|&d| d == c))
}

/// Largest subsequence of `x` that is also a subsequence of `y`, by trying
/// all `2^|x|` subsequences.
pub fn lcs_brute_oracle(x: &[u32], y: &[u32]) -> Result<usize> {
    if x.len() > BRUTE_MAX_LEN {
        return Err(Error::Precondition(format!(
            "brute-force LCS takes |x| <= {BRUTE_MAX_LEN}, got {}",
            x.len()
        )));
    }
    let mut best = 0;
    for mask in 0u32..(1 << x.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let sub = (0..x.len()).filter(|i| mask & (1 << i) != 0).map(|i| x[i]);
        if is_subsequence(sub, y) {
            best = size;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;
    use proptest::prelude::*;

    fn w(s: &str) -> Vec<u32> {
        Word::parse(s).unwrap().letters
    }

    #[test]
    fn small_cases() {
        assert_eq!(lcs_length(&[], &w("0101")), 0);
        assert_eq!(lcs_length(&w("0110"), &w("0110")), 4);
        assert_eq!(lcs_brute_oracle(&w("10"), &w("11")).unwrap(), 1);
        assert_eq!(lcs_brute_oracle(&w("1010"), &w("0101")).unwrap(), 3);
        assert_eq!(lcs_length(&w("1010"), &w("0101")), 3);
        assert_eq!(lcs_dp(&w("1010"), &w("0101")), 3);
    }

    #[test]
    fn brute_cap() {
        assert!(lcs_brute_oracle(&[0; 13], &[0]).is_err());
    }

    #[test]
    fn bitparallel_crosses_word_boundaries() {
        let mut rng = RandomSource::new(77, 0);
        for len in [63usize, 64, 65, 127, 128, 129, 300] {
            for sigma in [2usize, 4] {
                let x: Vec<u32> = (0..len).map(|_| rng.below(sigma) as u32).collect();
                let y: Vec<u32> = (0..len + 7).map(|_| rng.below(sigma) as u32).collect();
                assert_eq!(lcs_bitparallel(&x, &y), lcs_dp(&x, &y), "len {len}");
                assert_eq!(lcs_bitparallel(&y, &x), lcs_dp(&x, &y), "len {len}");
            }
        }
    }

    #[test]
    fn checked_mode_rejects_foreign_letters() {
        let bin = FiniteDistribution::uniform(2).unwrap();
        let x = Word::parse("012").unwrap();
        let y = Word::parse("01").unwrap();
        assert!(lcs_length_checked(&x, &y, &bin, &bin).is_err());
        assert_eq!(lcs_length_checked(&y, &y, &bin, &bin).unwrap(), 2);
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(x in prop::collection::vec(0u32..3, 0..40),
                                 y in prop::collection::vec(0u32..3, 0..40)) {
            let l = lcs_length(&x, &y);
            prop_assert_eq!(l, lcs_length(&y, &x));
            prop_assert_eq!(l, lcs_dp(&x, &y));
            prop_assert!(l <= x.len().min(y.len()));
        }

        #[test]
        fn appending_never_decreases(x in prop::collection::vec(0u32..2, 0..30),
                                     y in prop::collection::vec(0u32..2, 0..30),
                                     c in 0u32..2) {
            let mut x2 = x.clone();
            x2.push(c);
            prop_assert!(lcs_length(&x2, &y) >= lcs_length(&x, &y));
        }

        #[test]
        fn one_letter_change_moves_by_at_most_one(x in prop::collection::vec(0u32..3, 1..30),
                                                  y in prop::collection::vec(0u32..3, 1..30),
                                                  pos in any::<prop::sample::Index>(),
                                                  c in 0u32..3) {
            let mut x2 = x.clone();
            let i = pos.index(x.len());
            x2[i] = c;
            let d = lcs_length(&x2, &y) as i64 - lcs_length(&x, &y) as i64;
            prop_assert!(d.abs() <= 1);
        }
    }
}
