use super::{chi_square_upper, normal_two_sided, TestResult};
use crate::error::{Error, Result};

/// Largest autocorrelation lag in the audit suite.
pub const MAX_LAG: usize = 64;

/// Expands bytes into bits, most significant bit first.
pub fn unpack_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1 == 1))
        .collect()
}

fn require(test: &'static str, required: usize, actual: usize) -> Result<()> {
    if actual < required {
        return Err(Error::TooShort { test, required, actual });
    }
    Ok(())
}

/// Monobit test: `z = (#1 - #0) / sqrt(n)`.
pub fn frequency_test(bits: &[bool]) -> Result<TestResult> {
    require("frequency", 100, bits.len())?;
    let ones = bits.iter().filter(|&&b| b).count() as f64;
    let n = bits.len() as f64;
    let z = (2.0 * ones - n) / n.sqrt();
    Ok(TestResult::new("frequency", z, normal_two_sided(z), bits.len()))
}

/// Autocorrelation at lag `d`: with `A = sum_i b_i xor b_{i+d}` over the `n - d`
/// overlapping pairs, `z = 2 (A - (n-d)/2) / sqrt(n - d)`.
pub fn autocorrelation_test(bits: &[bool], lag: usize) -> Result<TestResult> {
    if !(1..=MAX_LAG).contains(&lag) {
        return Err(Error::InvalidArgument(format!("lag {lag} outside 1..={MAX_LAG}")));
    }
    let pairs = bits.len().saturating_sub(lag);
    require("autocorrelation", 100, pairs)?;
    let a = bits.iter().zip(&bits[lag..]).filter(|(x, y)| x != y).count() as f64;
    let m = pairs as f64;
    let z = 2.0 * (a - m / 2.0) / m.sqrt();
    Ok(TestResult::new(
        format!("autocorrelation_d{lag}"),
        z,
        normal_two_sided(z),
        bits.len(),
    ))
}

/// Serial test on `w`-bit words.
///
/// Non-overlapping: chi-square of the `2^w` word counts over `floor(n/w)` words,
/// `2^w - 1` degrees of freedom. Overlapping: the first difference
/// `psi2_w - psi2_{w-1}` of the generalized serial statistic (cyclic
/// wrap-around), `2^(w-1)` degrees of freedom.
pub fn serial_test(bits: &[bool], word_length: usize, overlapping: bool) -> Result<TestResult> {
    if !(2..=3).contains(&word_length) {
        return Err(Error::InvalidArgument(format!(
            "serial word length {word_length} not in {{2, 3}}"
        )));
    }
    require("serial", 100 << word_length, bits.len())?;
    let cells = 1usize << word_length;
    let (statistic, dof, name) = if overlapping {
        let stat = psi_squared(bits, word_length) - psi_squared(bits, word_length - 1);
        (stat, (cells / 2) as f64, format!("serial_w{word_length}_overlapping"))
    } else {
        let mut counts = vec![0u64; cells];
        for word in bits.chunks_exact(word_length) {
            counts[word_value(word)] += 1;
        }
        let words = (bits.len() / word_length) as f64;
        let sum_sq: f64 = counts.iter().map(|&c| (c as f64).powi(2)).sum();
        let stat = cells as f64 / words * sum_sq - words;
        (stat, (cells - 1) as f64, format!("serial_w{word_length}"))
    };
    let statistic = statistic.max(0.0);
    Ok(TestResult::new(
        name,
        statistic,
        chi_square_upper(statistic, dof),
        bits.len(),
    ))
}

fn word_value(word: &[bool]) -> usize {
    word.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}

/// `psi2_m = 2^m / n * sum v^2 - n` over all `n` cyclic overlapping `m`-bit patterns.
fn psi_squared(bits: &[bool], m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let n = bits.len();
    let mask = (1usize << m) - 1;
    let mut counts = vec![0u64; 1 << m];
    let mut word = word_value(&bits[..m - 1]);
    for i in 0..n {
        word = ((word << 1) | usize::from(bits[(i + m - 1) % n])) & mask;
        counts[word] += 1;
    }
    let sum_sq: f64 = counts.iter().map(|&c| (c as f64).powi(2)).sum();
    (1usize << m) as f64 / n as f64 * sum_sq - n as f64
}
