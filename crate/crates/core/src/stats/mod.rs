//! Statistical audit of emitted bits and bytes.
//!
//! Normal statistics use two-sided p-values, chi-square statistics the upper
//! tail. A test fails at 99% when `p < 0.01` and at 99.9% when `p < 0.001`.

mod bits;
mod bytes;
mod calibration;
mod order;

pub use bits::{autocorrelation_test, frequency_test, serial_test, unpack_bits, MAX_LAG};
pub use bytes::{chi_square_bytes, empirical_min_entropy, ByteHistogram};
pub use calibration::{binomial_band, ks_uniform, FailureBand};
pub use order::{expected_min_entropy, poisson_max_distribution, MaxDistribution, MinEntropyEstimate};

use serde::{Deserialize, Serialize};

pub const ALPHA_99: f64 = 0.01;
pub const ALPHA_999: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestResult {
    pub name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub pass_99: bool,
    pub pass_999: bool,
    pub sample_size: u64,
}

impl TestResult {
    pub fn new(name: impl Into<String>, statistic: f64, p_value: f64, sample_size: usize) -> Self {
        let p_value = if p_value.is_nan() { 0.0 } else { p_value.clamp(0.0, 1.0) };
        TestResult {
            name: name.into(),
            statistic,
            p_value,
            pass_99: p_value >= ALPHA_99,
            pass_999: p_value >= ALPHA_999,
            sample_size: sample_size as u64,
        }
    }
}

/// Two-sided p-value of a standard normal statistic.
pub fn normal_two_sided(z: f64) -> f64 {
    statrs::function::erf::erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Upper-tail p-value of a chi-square statistic.
pub fn chi_square_upper(statistic: f64, dof: f64) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    statrs::function::gamma::gamma_ur(dof / 2.0, statistic / 2.0)
}
