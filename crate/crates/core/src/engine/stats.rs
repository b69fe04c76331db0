use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Result};

fn log_lik(k: f64, n: f64, q: f64) -> f64 {
    let a = if k > 0.0 { k * q.ln() } else { 0.0 };
    let b = if n > k { (n - k) * (1.0 - q).ln() } else { 0.0 };
    a + b
}

/// Likelihood-ratio interval for a per-slot Bernoulli success rate: every
/// `q` with `2 (ℓ(q̂) - ℓ(q)) <= χ²₁(level)`.
pub fn dr_confidence_interval(successes: u64, timeslots: u64, level: f64) -> Result<(f64, f64)> {
    if timeslots == 0 {
        return invalid("confidence interval needs at least one timeslot");
    }
    if successes > timeslots {
        return invalid(format!("{successes} successes in {timeslots} timeslots"));
    }
    if !(level > 0.0 && level < 1.0) {
        return invalid(format!("confidence level {level} outside (0,1)"));
    }
    let crit = ChiSquared::new(1.0).expect("one degree of freedom").inverse_cdf(level);
    let (k, n) = (successes as f64, timeslots as f64);
    let q_hat = k / n;
    let top = log_lik(k, n, q_hat);
    // Positive inside the interval, negative outside.
    let inside = |q: f64| crit - 2.0 * (top - log_lik(k, n, q));
    let bisect = |mut lo: f64, mut hi: f64, rising: bool| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (inside(mid) >= 0.0) == rising {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let low = if successes == 0 { 0.0 } else { bisect(0.0, q_hat, true) };
    let high = if successes == timeslots { 1.0 } else { bisect(q_hat, 1.0, false) };
    Ok((low.min(q_hat), high.max(q_hat)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundaries() {
        assert_eq!(dr_confidence_interval(5, 5, 0.999).unwrap().1, 1.0);
        assert_eq!(dr_confidence_interval(0, 50, 0.999).unwrap().0, 0.0);
        assert!(dr_confidence_interval(1, 0, 0.999).is_err());
    }

    #[test]
    fn width_matches_normal_approximation() {
        let (lo, hi) = dr_confidence_interval(300, 3000, 0.999).unwrap();
        assert!(lo < 0.1 && 0.1 < hi);
        let w = hi - lo;
        assert!((w - 0.036).abs() < 0.2 * 0.036, "width {w}");
    }

    #[test]
    fn endpoints_sit_on_the_critical_contour() {
        let (lo, hi) = dr_confidence_interval(37, 410, 0.999).unwrap();
        let crit = ChiSquared::new(1.0).unwrap().inverse_cdf(0.999);
        let top = log_lik(37.0, 410.0, 37.0 / 410.0);
        for q in [lo, hi] {
            assert!((2.0 * (top - log_lik(37.0, 410.0, q)) - crit).abs() < 1e-8);
        }
    }
}
