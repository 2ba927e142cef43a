//! Exact combinatorics over urn configurations.
//!
//! A configuration of `n` balls in `N` urns is a strictly increasing sequence
//! `s_1 < ... < s_n` in `1..=N`. Its rank
//!
//! ```text
//! I(S) = sum_{k=1..n} C(N - s_k, n - k + 1)
//! ```
//!
//! counts the configurations that come after `S` in lexicographic order, so
//! `I = T - 1` for `{1, ..., n}` and `I = 0` for `{N-n+1, ..., N}`, with
//! `T = C(N, n)`. Everything here is exact; no floating point.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::centroids::CentroidSet;
use crate::error::{Error, Result};

/// Rank of a configuration together with the size of its range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexIndex {
    /// The rank `I`, in `0..total`.
    pub rank: BigUint,
    /// `T = C(N, n)`.
    pub total: BigUint,
    pub urn_count: u64,
    pub occupied: usize,
}

/// Accumulates a rational factor and applies it to a big integer on `flush`.
///
/// Factors are first multiplied into machine words, then into small big
/// integers, so a flush costs one multiplication and one division regardless of
/// how many factors were pushed. Every flush point must leave the value at a
/// binomial coefficient, which keeps the division exact.
struct FactorBatch {
    num: u64,
    den: u64,
    num_big: BigUint,
    den_big: BigUint,
}

impl FactorBatch {
    fn new() -> Self {
        FactorBatch {
            num: 1,
            den: 1,
            num_big: BigUint::one(),
            den_big: BigUint::one(),
        }
    }

    fn push(&mut self, num: u64, den: u64) {
        match self.num.checked_mul(num) {
            Some(n) => self.num = n,
            None => {
                self.num_big *= self.num;
                self.num = num;
            }
        }
        match self.den.checked_mul(den) {
            Some(d) => self.den = d,
            None => {
                self.den_big *= self.den;
                self.den = den;
            }
        }
    }

    fn flush(&mut self, value: &mut BigUint) {
        self.num_big *= self.num;
        self.den_big *= self.den;
        if !self.num_big.is_one() {
            *value *= &self.num_big;
        }
        if !self.den_big.is_one() {
            *value /= &self.den_big;
        }
        *self = FactorBatch::new();
    }
}

/// Exact binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut value = BigUint::one();
    let mut batch = FactorBatch::new();
    // C(n, i+1) = C(n, i) * (n - i) / (i + 1)
    for i in 0..k {
        batch.push(n - i, i + 1);
    }
    batch.flush(&mut value);
    value
}

/// `T = C(N, n)`, the number of ways to place `n` balls in `N` urns.
pub fn total_combinations(urn_count: u64, occupied: u64) -> Result<BigUint> {
    if occupied > urn_count {
        return Err(Error::InvalidArgument(format!(
            "{occupied} occupied urns exceed {urn_count} urns"
        )));
    }
    Ok(binomial(urn_count, occupied))
}

/// Lexicographic rank of a configuration.
pub fn lex_rank(set: &CentroidSet) -> LexIndex {
    LexIndex {
        rank: rank_of(set.urn_count(), set.occupied()),
        total: binomial(set.urn_count(), set.len() as u64),
        urn_count: set.urn_count(),
        occupied: set.len(),
    }
}

/// `sum_k C(N - s_k, n - k + 1)` for a strictly increasing `occupied` in `1..=N`.
///
/// The terms are visited from `k = n` down to `k = 1`, so both binomial indices
/// grow. Each term is reached from the previous one by an exact rational factor
/// with `min(gap, j)` small factors on each side: either stepping the top index
/// one urn at a time, or the ratio of falling factorials when the gap is wide.
pub fn rank_of(urn_count: u64, occupied: &[u64]) -> BigUint {
    let mut rank = BigUint::zero();
    // (top, bottom, C(top, bottom)) of the previous non-zero term
    let mut previous: Option<(u64, u64, BigUint)> = None;
    for (i, &s) in occupied.iter().rev().enumerate() {
        let (top, j) = (urn_count - s, i as u64 + 1);
        let value = match previous.take() {
            // a tail packed against urn N contributes C(j - 1, j) = 0
            None if top < j => continue,
            None => binomial(top, j),
            Some((prev_top, _, mut value)) => {
                let mut batch = FactorBatch::new();
                if top - prev_top <= j {
                    // C(t, j-1) = C(t-1, j-1) t / (t-j+1), then C(top, j) = C(top, j-1) (top-j+1) / j
                    for t in prev_top + 1..=top {
                        batch.push(t, t + 1 - j);
                    }
                    batch.push(top + 1 - j, j);
                } else {
                    // C(top, j) / C(prev, j-1) = [top]_j / (j [prev]_(j-1))
                    for t in top + 1 - j..=top {
                        batch.push(t, 1);
                    }
                    for t in prev_top + 2 - j..=prev_top {
                        batch.push(1, t);
                    }
                    batch.push(1, j);
                }
                batch.flush(&mut value);
                value
            }
        };
        rank += &value;
        previous = Some((top, j, value));
    }
    rank
}

/// Inverse of [`lex_rank`]: the configuration of `n` balls in `N` urns with rank `I`.
///
/// Greedy: each `s_k` is the smallest position whose term `C(N - s_k, n - k + 1)`
/// does not exceed the remaining rank.
pub fn lex_unrank(rank: &BigUint, urn_count: u64, occupied: u64) -> Result<CentroidSet> {
    let total = total_combinations(urn_count, occupied)?;
    if rank >= &total {
        return Err(Error::InvalidArgument(format!("rank {rank} outside [0, {total})")));
    }
    let mut remaining = rank.clone();
    let mut positions = Vec::with_capacity(occupied as usize);
    if occupied == 0 {
        return CentroidSet::new(0, urn_count, positions);
    }
    // c = N - s runs downward from N - 1; value = C(c, j)
    let mut j = occupied;
    let mut c = urn_count - 1;
    let mut value = binomial(c, j);
    loop {
        while value > remaining {
            // C(c-1, j) = C(c, j) (c - j) / c
            value *= c - j;
            value /= c;
            c -= 1;
        }
        positions.push(urn_count - c);
        remaining -= &value;
        if j == 1 {
            break;
        }
        // C(c-1, j-1) = C(c, j) j / c
        if c == 0 {
            value = BigUint::zero();
        } else {
            value *= j;
            value /= c;
            c -= 1;
        }
        j -= 1;
    }
    CentroidSet::new(0, urn_count, positions)
}

/// Number of configurations preceding `S` lexicographically.
///
/// Counted directly rather than as `T - 1 - I`: the configurations agreeing
/// with `S` on its first `k` balls and placing ball `k + 1` strictly between
/// `s_k` and `s_(k+1)` (with `s_0 = 0`) number
/// `C(N - s_k, n - k) - C(N - s_(k+1) + 1, n - k)`.
pub fn predecessor_count(set: &CentroidSet) -> BigUint {
    let (urns, n) = (set.urn_count(), set.len() as u64);
    let mut count = BigUint::zero();
    let mut prev = 0;
    for (k, &s) in set.occupied().iter().enumerate() {
        let j = n - k as u64;
        count += binomial(urns - prev, j) - binomial(urns + 1 - s, j);
        prev = s;
    }
    count
}
