//! Wilcoxon signed-rank test for paired samples.
//!
//! Zero differences are dropped; |differences| get midranks. The
//! two-sided p is exact (full null distribution, tie-aware) for
//! n <= 25 and a continuity-corrected normal approximation beyond.

use crate::error::{Error, Result};
use crate::stats::rank::{average_ranks, tie_cubic_term};
use crate::stats::special::normal_sf;
use crate::stats::{StatTestResult, TestMethod};

const EXACT_LIMIT: usize = 25;

pub fn wilcoxon_signed_rank(paired_a: &[f64], paired_b: &[f64]) -> Result<StatTestResult> {
    if paired_a.len() != paired_b.len() {
        return Err(Error::DimensionMismatch {
            expected: paired_a.len(),
            got: paired_b.len(),
        });
    }
    let diffs: Vec<f64> = paired_a
        .iter()
        .zip(paired_b)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Err(Error::DegenerateSample("all differences zero".into()));
    }
    let n = diffs.len();
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, tie_sizes) = average_ranks(&abs)?;

    let w_plus: f64 = ranks
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let total = n as f64 * (n as f64 + 1.0) / 2.0;
    let w_minus = total - w_plus;
    let statistic = w_plus.min(w_minus);

    let p = if n <= EXACT_LIMIT {
        exact_two_sided_p(&ranks, statistic)
    } else {
        let mean = total / 2.0;
        let var = n as f64 * (n as f64 + 1.0) * (2.0 * n as f64 + 1.0) / 24.0
            - tie_cubic_term(&tie_sizes) / 48.0;
        let correction = 0.5 * (statistic - mean).signum();
        let z = (statistic - mean - correction) / var.sqrt();
        (2.0 * normal_sf(z.abs())).min(1.0)
    };

    Ok(StatTestResult {
        method: TestMethod::Wilcoxon,
        statistic,
        p,
        p_adj: None,
        pair: None,
    })
}

/// Exact two-sided p over the 2^n sign-assignment null, computed from
/// the full distribution of W+ with ranks scaled to integers (midranks
/// are multiples of 1/2).
fn exact_two_sided_p(ranks: &[f64], statistic: f64) -> f64 {
    let weights: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max_sum: usize = weights.iter().sum();
    let mut counts = vec![0.0f64; max_sum + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &w in &weights {
        reach += w;
        for s in (0..=reach).rev() {
            if s >= w && counts[s - w] > 0.0 {
                counts[s] += counts[s - w];
            }
        }
    }
    let t_scaled = (2.0 * statistic).round() as usize;
    let below: f64 = counts[..=t_scaled.min(max_sum)].iter().sum();
    let total = 2.0f64.powi(ranks.len() as i32);
    (2.0 * below / total).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_domination_n3() {
        let r = wilcoxon_signed_rank(&[5.0, 6.0, 7.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.statistic, 0.0); // W- side
        assert!((r.p - 0.25).abs() < 1e-12);
    }

    #[test]
    fn zero_differences_dropped() {
        // identical except one pair: n reduces to 1, p = 1
        let r = wilcoxon_signed_rank(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_differences_error() {
        assert!(matches!(
            wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn exact_matches_brute_force_enumeration_up_to_n10() {
        // brute force: enumerate all 2^n sign patterns of the ranked
        // differences and count patterns at least as extreme
        fn brute_force_p(diffs: &[f64]) -> f64 {
            let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
            let (ranks, _) = average_ranks(&abs).unwrap();
            let n = diffs.len();
            let total: f64 = ranks.iter().sum();
            let w_plus: f64 = ranks
                .iter()
                .zip(diffs)
                .filter(|(_, d)| **d > 0.0)
                .map(|(r, _)| r)
                .sum();
            let observed = w_plus.min(total - w_plus);
            let mut at_or_below = 0usize;
            for mask in 0..(1usize << n) {
                let w: f64 = (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| ranks[i])
                    .sum();
                if w <= observed + 1e-12 {
                    at_or_below += 1;
                }
            }
            (2.0 * at_or_below as f64 / (1usize << n) as f64).min(1.0)
        }

        let cases: Vec<Vec<f64>> = vec![
            vec![1.0, -2.0, 3.0],
            vec![0.5, 0.5, -0.5, 2.0, -3.0], // ties in |d|
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0],
            vec![-1.0, 2.0, -2.0, 4.0, -4.0, 6.0, 7.0, -8.0, 9.0, 1.5],
        ];
        for diffs in cases {
            let b: Vec<f64> = vec![0.0; diffs.len()];
            let r = wilcoxon_signed_rank(&diffs, &b).unwrap();
            let want = brute_force_p(&diffs);
            assert!(
                (r.p - want).abs() < 1e-12,
                "diffs {diffs:?}: got {}, want {want}",
                r.p
            );
        }
    }

    #[test]
    fn normal_approximation_matches_reference() {
        // n=30 paired sample frozen together with the reference p-value
        // from an independent statistical package (continuity-corrected
        // normal approximation, zeros dropped).
        let a = [
            1.690526, -0.465937, 0.03282, 0.407516, -0.788923, 0.002066, -0.00089, -1.754724,
            1.017658, 0.600499, -0.625429, -0.171548, 0.505299, -0.261356, -0.242749, -1.453241,
            0.55458, 0.123881, 0.27446, -1.526525, 1.6507, 0.154336, -0.38714, 2.029072,
            -0.045386, -1.450679, -0.405228, -2.288315, 1.049397, -0.416474,
        ];
        let b = [
            1.619249, 0.370298, -0.492718, 0.975231, -1.52113, -0.029014, -0.303, -0.723736,
            2.200738, 0.735792, 0.094938, 0.038459, 1.08933, -0.337775, -0.796919, -2.054791,
            1.046141, 1.547678, 0.709166, -1.488827, 2.906709, 0.572986, -0.036423, 2.455361,
            0.188425, -1.305417, -0.82271, -1.737503, 1.302009, 0.480069,
        ];
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.statistic, 112.0);
        assert!((r.p - 0.013579415038448943).abs() < 1e-10, "p = {}", r.p);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(wilcoxon_signed_rank(&[1.0], &[1.0, 2.0]).is_err());
    }
}
