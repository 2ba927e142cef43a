//! Second-level checks over many first-level p-values.

use serde::{Deserialize, Serialize};

/// Kolmogorov-Smirnov test of samples against the uniform law on `[0, 1]`.
/// Returns `(D, p)`; `p` uses the asymptotic Kolmogorov distribution with the
/// Stephens small-sample correction.
pub fn ks_uniform(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (0.0, 1.0);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            (x - i as f64 / nf).max((i + 1) as f64 / nf - x)
        })
        .fold(0.0, f64::max);
    let sqrt_n = nf.sqrt();
    (d, kolmogorov_q((sqrt_n + 0.12 + 0.11 / sqrt_n) * d))
}

/// `Q_KS(t) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 t^2)`.
fn kolmogorov_q(t: f64) -> f64 {
    if t < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * t * t).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Expected number of failures among independent tests at level `alpha`, with a
/// 3-sigma binomial acceptance band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureBand {
    pub trials: u64,
    pub alpha: f64,
    pub expected: f64,
    pub lower: f64,
    pub upper: f64,
}

impl FailureBand {
    pub fn contains(&self, failures: u64) -> bool {
        let f = failures as f64;
        f >= self.lower && f <= self.upper
    }
}

pub fn binomial_band(trials: u64, alpha: f64) -> FailureBand {
    let expected = trials as f64 * alpha;
    let sigma = (expected * (1.0 - alpha)).sqrt();
    FailureBand {
        trials,
        alpha,
        expected,
        lower: (expected - 3.0 * sigma).max(0.0),
        upper: expected + 3.0 * sigma,
    }
}
