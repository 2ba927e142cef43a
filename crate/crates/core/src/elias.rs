//! Elias unbiasing of a uniform integer on `[0, T)`.
//!
//! Write `T = sum_k alpha_k 2^k`. The range is cut into consecutive blocks of
//! size `2^k`, one per set bit, largest first. An integer in a block of size
//! `2^k` emits the `k` low-order bits of its offset into the block, most
//! significant first. Inside a block every `k`-bit string is hit exactly once,
//! so the emitted bits are unbiased and independent when the input is uniform.
//! A final block of size `2^0` emits the empty string.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::comb::total_combinations;
use crate::error::{Error, Result};

/// An ordered bit sequence; may be empty.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        BitString::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    /// Unsigned value of the bits read most-significant first.
    pub fn to_biguint(&self) -> BigUint {
        let mut value = BigUint::zero();
        for (i, &b) in self.bits.iter().rev().enumerate() {
            if b {
                value.set_bit(i as u64, true);
            }
        }
        value
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidArgument(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString::from_bits)
    }
}

/// Binary expansion of `T` as the list of block exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliasTable {
    total: BigUint,
    alphas: Vec<u64>,
}

impl EliasTable {
    pub fn new(total: BigUint) -> Result<Self> {
        if total.is_zero() {
            return Err(Error::InvalidArgument("T must be positive".into()));
        }
        let alphas = (0..total.bits()).rev().filter(|&k| total.bit(k)).collect();
        Ok(EliasTable { total, alphas })
    }

    pub fn total(&self) -> &BigUint {
        &self.total
    }

    /// `floor(log2 T)`.
    pub fn top_exponent(&self) -> u64 {
        self.alphas[0]
    }

    /// Exponents `k` with `alpha_k = 1`, descending.
    pub fn alphas(&self) -> &[u64] {
        &self.alphas
    }

    /// Start of the `i`-th block: the sum of `2^k` over the `i` larger blocks.
    pub fn block_start(&self, i: usize) -> BigUint {
        let mut start = BigUint::zero();
        for &k in &self.alphas[..i] {
            start.set_bit(k, true);
        }
        start
    }

    /// Exact expected output length under uniform input, as `(sum k 2^k, T)`.
    pub fn mean_length_ratio(&self) -> (BigUint, BigUint) {
        let mut num = BigUint::zero();
        for &k in &self.alphas {
            num += BigUint::from(k) << k;
        }
        (num, self.total.clone())
    }

    pub fn mean_length(&self) -> f64 {
        let (num, den) = self.mean_length_ratio();
        ratio_to_f64(&num, &den)
    }

    pub fn encode(&self, rank: &BigUint) -> Result<BitString> {
        elias_encode(rank, &self.total)
    }

    pub fn decode(&self, bits: &BitString) -> Result<BigUint> {
        elias_decode(bits, &self.total)
    }
}

/// Unbiased bit string for a rank `I < T`.
///
/// `I` and `T` agree on every bit above the block exponent `k`, `T` has bit `k`
/// set and `I` has it clear, so `k` is the highest bit where they differ and the
/// offset of `I` in its block is simply `I mod 2^k`.
pub fn elias_encode(rank: &BigUint, total: &BigUint) -> Result<BitString> {
    if rank >= total {
        return Err(Error::InvalidArgument(format!("rank {rank} not below T = {total}")));
    }
    let diff = rank ^ total;
    let k = diff.bits() - 1;
    Ok(BitString::from_bits((0..k).rev().map(|i| rank.bit(i)).collect()))
}

/// The unique rank that encodes to `bits` under `T`.
pub fn elias_decode(bits: &BitString, total: &BigUint) -> Result<BigUint> {
    if total.is_zero() {
        return Err(Error::InvalidArgument("T must be positive".into()));
    }
    let k = bits.len() as u64;
    if !total.bit(k) {
        return Err(Error::InvalidArgument(format!(
            "no {k}-bit block exists for T = {total}"
        )));
    }
    let start = (total >> (k + 1)) << (k + 1);
    Ok(start + bits.to_biguint())
}

/// `h2(q) = -q log2 q - (1-q) log2 (1-q)` with `0 log 0 = 0`.
pub fn binary_entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("probability {q} outside [0, 1]")));
    }
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(term(q) + term(1.0 - q))
}

/// Expected Elias output for `n` balls in `N` urns.
#[derive(Debug, Clone, PartialEq)]
pub struct Efficiency {
    /// Expected output length in bits.
    pub mean_length: f64,
    /// `mean_length / N`.
    pub eta: f64,
    /// `h2(n / N)`.
    pub entropy: f64,
    /// `h2(n / N) - eta`, never negative.
    pub gap: f64,
}

pub fn expected_efficiency(urn_count: u64, occupied: u64) -> Result<Efficiency> {
    if urn_count == 0 {
        return Err(Error::InvalidArgument("urn count must be positive".into()));
    }
    let table = EliasTable::new(total_combinations(urn_count, occupied)?)?;
    let mean_length = table.mean_length();
    let eta = mean_length / urn_count as f64;
    let entropy = binary_entropy(occupied as f64 / urn_count as f64)?;
    Ok(Efficiency {
        mean_length,
        eta,
        entropy,
        gap: entropy - eta,
    })
}

/// `num / den` to double precision for arbitrarily large operands.
pub(crate) fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    let scaled = (num << 64u32) / den;
    scaled.to_f64().unwrap_or(f64::INFINITY) / 2f64.powi(64)
}
