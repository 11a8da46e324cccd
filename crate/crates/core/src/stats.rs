//! Bernoulli estimates with Wilson score intervals.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// A Monte Carlo point estimate of a probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub estimate: f64,
    pub trials: u64,
    pub successes: u64,
    /// 95% Wilson score interval.
    pub ci: [f64; 2],
    pub seed: u64,
    /// Excluded from serialized payloads so records stay byte-reproducible.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl EstimateResult {
    pub fn from_counts(successes: u64, trials: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::domain("trials must be >= 1"));
        }
        if successes > trials {
            return Err(Error::domain("successes exceed trials"));
        }
        let (lo, hi) = wilson_interval(successes, trials, Z95);
        Ok(EstimateResult {
            estimate: successes as f64 / trials as f64,
            trials,
            successes,
            ci: [lo, hi],
            seed,
            wall_time: Duration::ZERO,
        })
    }

    pub fn with_wall_time(mut self, d: Duration) -> Self {
        self.wall_time = d;
        self
    }

    /// True when this interval lies entirely below `other`'s.
    pub fn below(&self, other: &EstimateResult) -> bool {
        self.ci[1] < other.ci[0]
    }
}

/// Wilson score interval for `successes / trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo.min(p), hi.max(p))
}

/// `|freq - p| <= sigmas * sqrt(p (1 - p) / n)`.
pub fn within_sigmas(successes: u64, trials: u64, p: f64, sigmas: f64) -> bool {
    let n = trials as f64;
    let freq = successes as f64 / n;
    (freq - p).abs() <= sigmas * (p * (1.0 - p) / n).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 8/10 at 95%: textbook value (0.4902, 0.9433)
        let (lo, hi) = wilson_interval(8, 10, Z95);
        assert!((lo - 0.49016).abs() < 1e-4, "{lo}");
        assert!((hi - 0.94332).abs() < 1e-4, "{hi}");
    }

    #[test]
    fn extremes() {
        let all = EstimateResult::from_counts(50, 50, 0).unwrap();
        assert_eq!(all.estimate, 1.0);
        assert_eq!(all.ci[1], 1.0);
        assert!(all.ci[0] < 1.0);
        let none = EstimateResult::from_counts(0, 50, 0).unwrap();
        assert_eq!(none.ci[0], 0.0);
        assert!(none.ci[1] > 0.0);
        assert!(EstimateResult::from_counts(0, 0, 0).is_err());
    }

    #[test]
    fn ci_brackets_point() {
        for n in 1..60u64 {
            for s in 0..=n {
                let r = EstimateResult::from_counts(s, n, 0).unwrap();
                assert!(r.ci[0] <= r.estimate && r.estimate <= r.ci[1]);
            }
        }
    }
}
