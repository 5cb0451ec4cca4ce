//! Cliff's delta ordinal effect size.

use crate::error::{Error, Result};
use crate::stats::{StatTestResult, TestMethod};

/// delta = (#{x > y} - #{x < y}) / (n_x * n_y) over all cross pairs.
///
/// An effect size, not a hypothesis test: p is reported as 1.
pub fn cliffs_delta(sample_x: &[f64], sample_y: &[f64]) -> Result<StatTestResult> {
    if sample_x.is_empty() || sample_y.is_empty() {
        return Err(Error::EmptyInput("cliffs delta needs both samples".into()));
    }
    let mut greater = 0i64;
    let mut less = 0i64;
    for &x in sample_x {
        for &y in sample_y {
            if x > y {
                greater += 1;
            } else if x < y {
                less += 1;
            }
        }
    }
    let delta = (greater - less) as f64 / (sample_x.len() * sample_y.len()) as f64;
    Ok(StatTestResult {
        method: TestMethod::CliffsDelta,
        statistic: delta,
        p: 1.0,
        p_adj: None,
        pair: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_dominance_endpoints() {
        let hi = [5.0, 6.0, 7.0];
        let lo = [1.0, 2.0];
        assert_eq!(cliffs_delta(&hi, &lo).unwrap().statistic, 1.0);
        assert_eq!(cliffs_delta(&lo, &hi).unwrap().statistic, -1.0);
    }

    #[test]
    fn identical_samples_zero() {
        let s = [1.0, 2.0, 3.0];
        assert_eq!(cliffs_delta(&s, &s).unwrap().statistic, 0.0);
    }

    #[test]
    fn sign_flips_under_swap() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.5, 2.5, 0.5];
        let fwd = cliffs_delta(&x, &y).unwrap().statistic;
        let rev = cliffs_delta(&y, &x).unwrap().statistic;
        assert_eq!(fwd, 0.5); // hand-counted: (9 greater - 3 less) / 12
        assert_eq!(fwd, -rev);
        assert!(fwd.abs() <= 1.0);
    }

    #[test]
    fn empty_rejected() {
        assert!(cliffs_delta(&[], &[1.0]).is_err());
    }
}
