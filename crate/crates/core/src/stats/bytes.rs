use serde::{Deserialize, Serialize};

use super::{chi_square_upper, TestResult};
use crate::error::{Error, Result};

/// Occurrence count of each byte value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ByteHistogram {
    counts: Vec<u64>,
    total: u64,
}

impl ByteHistogram {
    pub fn from_bytes(bytes: &[u8]) -> Self {
        let mut counts = vec![0u64; 256];
        for &b in bytes {
            counts[usize::from(b)] += 1;
        }
        ByteHistogram {
            counts,
            total: bytes.len() as u64,
        }
    }

    pub fn from_counts(counts: [u64; 256]) -> Self {
        ByteHistogram {
            total: counts.iter().sum(),
            counts: counts.to_vec(),
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Largest single-byte count and the byte holding it.
    pub fn max(&self) -> (u8, u64) {
        let (byte, &count) = self
            .counts
            .iter()
            .enumerate()
            .max_by_key(|&(i, c)| (*c, std::cmp::Reverse(i)))
            .expect("256 bins");
        (byte as u8, count)
    }
}

/// Chi-square of byte counts against the uniform law, 255 degrees of freedom.
pub fn chi_square_bytes(hist: &ByteHistogram) -> Result<TestResult> {
    let required = 5 * 256;
    if hist.total < required {
        return Err(Error::TooShort {
            test: "byte_chi_square",
            required: required as usize,
            actual: hist.total as usize,
        });
    }
    let expected = hist.total as f64 / 256.0;
    let statistic: f64 = hist
        .counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    Ok(TestResult::new(
        "byte_chi_square",
        statistic,
        chi_square_upper(statistic, 255.0),
        hist.total as usize,
    ))
}

/// `-log2(max_i l_i / L)` in bits per byte.
pub fn empirical_min_entropy(hist: &ByteHistogram) -> Result<f64> {
    if hist.total == 0 {
        return Err(Error::InvalidArgument("empty byte histogram".into()));
    }
    let (_, max) = hist.max();
    Ok(-(max as f64 / hist.total as f64).log2())
}
