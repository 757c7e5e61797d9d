//! Small statistical helpers shared by the estimators and the harness.

use serde::{Deserialize, Serialize};

/// Two-sided 97.5% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// A closed interval `[low, high]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

/// Wilson score interval for a binomial proportion.
///
/// Returns `[0, 1]` when `trials == 0`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> Interval {
    if trials == 0 {
        return Interval { low: 0.0, high: 1.0 };
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Interval {
        low: if successes == 0 { 0.0 } else { (center - half).max(0.0) },
        high: if successes >= trials {
            1.0
        } else {
            (center + half).min(1.0)
        },
    }
}

/// Nearest-rank quantile of an ascending-sorted slice (`q` in `[0, 1]`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let q = q.clamp(0.0, 1.0);
    let rank = (q * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_known_value() {
        // 50/100 at 95%: center 0.5, half-width z*sqrt(.25/100 + z^2/40000)/(1+z^2/100)
        let iv = wilson_interval(50, 100, Z_95);
        assert!((iv.low - 0.403_831).abs() < 1e-5, "{iv:?}");
        assert!((iv.high - 0.596_169).abs() < 1e-5, "{iv:?}");
    }

    #[test]
    fn wilson_edges() {
        let iv = wilson_interval(0, 10, Z_95);
        assert_eq!(iv.low, 0.0);
        assert!(iv.high > 0.2 && iv.high < 0.35);
        let iv = wilson_interval(10, 10, Z_95);
        assert_eq!(iv.high, 1.0);
    }

    #[test]
    fn nearest_rank() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&xs, 0.0), Some(1.0));
        assert_eq!(quantile_sorted(&xs, 0.5), Some(2.0));
        assert_eq!(quantile_sorted(&xs, 0.51), Some(3.0));
        assert_eq!(quantile_sorted(&xs, 1.0), Some(4.0));
        assert_eq!(quantile_sorted(&[], 0.5), None);
    }
}
