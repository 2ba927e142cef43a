//! Distribution of the largest of `n` i.i.d. Poisson counts, and the expected
//! min-entropy of a uniform byte sample it implies.
//!
//! With `D(x)` the Poisson CDF, the maximum has mass
//! `Pi(x) = D(x)^n - D(x-1)^n`. `D(x)` is the regularized upper incomplete
//! gamma function `Q(x + 1, lambda)`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, gamma_ur};

use crate::error::{Error, Result};

/// Support is truncated where the neglected tail mass on each side drops below this.
const TAIL_MASS: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct MaxDistribution {
    pub n_vars: u32,
    pub lambda: f64,
    /// Smallest `x` carried in `pmf`.
    pub start: u64,
    /// `pmf[i] = Pi(start + i)`.
    pub pmf: Vec<f64>,
    pub mean: f64,
    pub sigma: f64,
}

impl MaxDistribution {
    pub fn probability(&self, x: u64) -> f64 {
        x.checked_sub(self.start)
            .and_then(|i| self.pmf.get(i as usize))
            .copied()
            .unwrap_or(0.0)
    }
}

/// `(D(x)^n, 1 - D(x)^n)`, each computed without cancellation in its small regime.
fn max_cdf(x: i64, n: f64, lambda: f64) -> (f64, f64) {
    if x < 0 {
        return (0.0, 1.0);
    }
    let a = x as f64 + 1.0;
    if a > lambda {
        // upper tail: C = P(X > x) is small and accurate from the lower gamma series
        let c = gamma_lr(a, lambda);
        let log_f = n * (-c).ln_1p();
        (log_f.exp(), -log_f.exp_m1())
    } else {
        let d = gamma_ur(a, lambda);
        let f = if d > 0.0 { (n * d.ln()).exp() } else { 0.0 };
        (f, 1.0 - f)
    }
}

pub fn poisson_max_distribution(n_vars: u32, lambda: f64) -> Result<MaxDistribution> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "Poisson mean {lambda} must be positive"
        )));
    }
    if n_vars == 0 {
        return Err(Error::InvalidArgument("need at least one variable".into()));
    }
    let n = f64::from(n_vars);

    // first x with D(x)^n above the lower cut
    let (mut lo, mut hi) = (0i64, lambda.ceil() as i64);
    while max_cdf(hi, n, lambda).0 <= TAIL_MASS {
        hi *= 2;
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if max_cdf(mid, n, lambda).0 > TAIL_MASS {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let start = lo;

    let mut pmf = Vec::new();
    let (mut prev_f, mut prev_g) = max_cdf(start - 1, n, lambda);
    let mut x = start;
    loop {
        let (f, g) = max_cdf(x, n, lambda);
        let p = if f < 0.5 { f - prev_f } else { prev_g - g };
        pmf.push(p.max(0.0));
        if g < TAIL_MASS {
            break;
        }
        prev_f = f;
        prev_g = g;
        x += 1;
    }

    let mean: f64 = pmf.iter().enumerate().map(|(i, p)| (start as f64 + i as f64) * p).sum();
    let variance: f64 = pmf
        .iter()
        .enumerate()
        .map(|(i, p)| (start as f64 + i as f64 - mean).powi(2) * p)
        .sum();
    Ok(MaxDistribution {
        n_vars,
        lambda,
        start: start as u64,
        pmf,
        mean,
        sigma: variance.sqrt(),
    })
}

/// Expected min-entropy of `L` uniform bytes, from the expected largest byte count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinEntropyEstimate {
    pub sample_bytes: u64,
    /// Expected largest single-byte count.
    pub mean_max_count: f64,
    pub sigma_max_count: f64,
    /// Expected largest relative frequency.
    pub max_frequency: f64,
    pub sigma_max_frequency: f64,
    /// `-log2` of the expected largest relative frequency, bits per byte.
    pub h_min: f64,
    /// First-order propagation of `sigma_max_count`.
    pub sigma_h_min: f64,
}

pub fn expected_min_entropy(sample_bytes: u64) -> Result<MinEntropyEstimate> {
    if sample_bytes < 256 {
        return Err(Error::InvalidArgument(format!(
            "need at least 256 bytes, got {sample_bytes}"
        )));
    }
    let l = sample_bytes as f64;
    let dist = poisson_max_distribution(256, l / 256.0)?;
    let max_frequency = dist.mean / l;
    Ok(MinEntropyEstimate {
        sample_bytes,
        mean_max_count: dist.mean,
        sigma_max_count: dist.sigma,
        max_frequency,
        sigma_max_frequency: dist.sigma / l,
        h_min: -max_frequency.log2(),
        sigma_h_min: dist.sigma / (dist.mean * std::f64::consts::LN_2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_variable_is_poisson() {
        let lambda = 3.5;
        let dist = poisson_max_distribution(1, lambda).unwrap();
        let mut pmf = (-lambda).exp();
        for x in 0..30u64 {
            if x > 0 {
                pmf *= lambda / x as f64;
            }
            let got = dist.probability(x);
            assert!((got - pmf).abs() < 1e-12, "x {x}: {got} vs {pmf}");
        }
        assert!((dist.mean - lambda).abs() < 1e-9);
        assert!((dist.sigma - lambda.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn mass_sums_to_one() {
        for (n, lambda) in [(1, 0.2), (16, 20.0), (256, 5468.171875)] {
            let dist = poisson_max_distribution(n, lambda).unwrap();
            let mass: f64 = dist.pmf.iter().sum();
            assert!((mass - 1.0).abs() < 1e-10, "n {n} lambda {lambda}: {mass}");
        }
    }

    #[test]
    fn reference_sample_size() {
        let est = expected_min_entropy(1_399_852).unwrap();
        assert!((est.mean_max_count - 5678.4).abs() < 0.05, "{est:?}");
        assert!((est.sigma_max_count - 29.4).abs() < 0.05, "{est:?}");
        assert!((est.h_min - 7.946).abs() < 5e-4);
        assert!((est.sigma_h_min - 0.007).abs() < 5e-4);
        assert!((est.max_frequency - 4.056e-3).abs() < 5e-7);
        assert!((est.sigma_max_frequency - 0.021e-3).abs() < 5e-7);
    }

    #[test]
    fn approaches_eight_bits() {
        let est = expected_min_entropy(1_000_000_000).unwrap();
        assert!(est.h_min < 8.0 && est.h_min > 7.99, "{}", est.h_min);
    }

    #[test]
    fn invalid_inputs() {
        assert!(poisson_max_distribution(256, 0.0).is_err());
        assert!(poisson_max_distribution(0, 1.0).is_err());
        assert!(expected_min_entropy(255).is_err());
    }
}
