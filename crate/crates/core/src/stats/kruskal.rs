//! Kruskal-Wallis omnibus test over three or more independent groups.

use crate::error::{Error, Result};
use crate::stats::rank::{average_ranks, tie_cubic_term};
use crate::stats::special::chi_square_sf;
use crate::stats::{RankSummary, StatTestResult, TestMethod};

/// Computes H over pooled midranks with the standard tie correction,
/// and a chi-square p-value on k - 1 degrees of freedom.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<(StatTestResult, RankSummary)> {
    let k = groups.len();
    if k < 3 {
        return Err(Error::Validation(format!(
            "kruskal-wallis needs >= 3 groups, got {k}"
        )));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::Validation("empty group".into()));
    }

    let summary = rank_groups(groups)?;
    let n = summary.total as f64;

    let tie_term = tie_cubic_term(&summary.tie_group_sizes);
    let correction = 1.0 - tie_term / (n * n * n - n);
    if correction <= 0.0 {
        return Err(Error::DegenerateSample(
            "all values identical across all groups".into(),
        ));
    }

    let sum_r2_over_n: f64 = summary
        .rank_sums
        .iter()
        .zip(&summary.group_sizes)
        .map(|(&r, &ni)| r * r / ni as f64)
        .sum();
    let h_raw = 12.0 / (n * (n + 1.0)) * sum_r2_over_n - 3.0 * (n + 1.0);
    let h = h_raw / correction;
    let p = chi_square_sf(h, k - 1);

    Ok((
        StatTestResult {
            method: TestMethod::KruskalWallis,
            statistic: h,
            p,
            p_adj: None,
            pair: None,
        },
        summary,
    ))
}

/// Pooled ranking bookkeeping shared by Kruskal-Wallis and Dunn.
pub fn rank_groups(groups: &[Vec<f64>]) -> Result<RankSummary> {
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let (ranks, tie_group_sizes) = average_ranks(&pooled)?;

    let mut rank_sums = Vec::with_capacity(groups.len());
    let mut group_sizes = Vec::with_capacity(groups.len());
    let mut cursor = 0;
    for g in groups {
        let sum: f64 = ranks[cursor..cursor + g.len()].iter().sum();
        rank_sums.push(sum);
        group_sizes.push(g.len());
        cursor += g.len();
    }
    let mean_ranks = rank_sums
        .iter()
        .zip(&group_sizes)
        .map(|(&r, &n)| r / n as f64)
        .collect();
    Ok(RankSummary {
        group_sizes,
        rank_sums,
        mean_ranks,
        total: pooled.len(),
        tie_group_sizes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_three_groups() {
        // ranks 1..9, rank sums (6, 15, 24) -> H = 7.2
        let groups = vec![
            vec![1.0, 2.0, 3.0],
            vec![4.0, 5.0, 6.0],
            vec![7.0, 8.0, 9.0],
        ];
        let (res, summary) = kruskal_wallis(&groups).unwrap();
        assert!((res.statistic - 7.2).abs() < 1e-9, "H = {}", res.statistic);
        assert_eq!(summary.rank_sums, vec![6.0, 15.0, 24.0]);
        // chi-square sf(7.2, 2) frozen from reference implementation
        assert!((res.p - 0.02732372244729252).abs() < 1e-10);
    }

    #[test]
    fn identical_groups_give_zero_after_tie_correction_is_defined() {
        // Not all pooled values equal, but the three groups coincide.
        let g = vec![1.0, 2.0, 3.0];
        let (res, _) = kruskal_wallis(&[g.clone(), g.clone(), g]).unwrap();
        assert!(res.statistic.abs() < 1e-12);
        assert!((res.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tie_correction_matches_reference() {
        let groups = vec![
            vec![1.0, 2.0, 2.0, 3.0],
            vec![2.0, 3.0, 4.0, 4.0],
            vec![4.0, 5.0, 6.0, 6.0],
        ];
        let (res, _) = kruskal_wallis(&groups).unwrap();
        assert!(
            (res.statistic - 8.160326086956522).abs() < 1e-9,
            "H = {}",
            res.statistic
        );
        assert!((res.p - 0.016904709225411534).abs() < 1e-10);
    }

    #[test]
    fn rank_sums_total_identity() {
        let groups = vec![
            vec![3.0, 3.0, 1.0],
            vec![2.0, 8.0, 8.0, 8.0],
            vec![5.0, 4.0],
        ];
        let summary = rank_groups(&groups).unwrap();
        let n = summary.total as f64;
        let total: f64 = summary.rank_sums.iter().sum();
        assert!((total - n * (n + 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_transform_invariance() {
        let groups = vec![
            vec![1.0, 2.0, 5.0],
            vec![3.0, 4.0, 6.0],
            vec![7.0, 8.0, 9.0],
        ];
        let transformed: Vec<Vec<f64>> = groups
            .iter()
            .map(|g| g.iter().map(|v| (v * 2.0).exp()).collect())
            .collect();
        let h0 = kruskal_wallis(&groups).unwrap().0.statistic;
        let h1 = kruskal_wallis(&transformed).unwrap().0.statistic;
        assert!((h0 - h1).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(kruskal_wallis(&[vec![1.0], vec![2.0]]).is_err());
        assert!(kruskal_wallis(&[vec![1.0], vec![], vec![2.0]]).is_err());
        let same = vec![2.0, 2.0];
        assert!(matches!(
            kruskal_wallis(&[same.clone(), same.clone(), same]),
            Err(Error::DegenerateSample(_))
        ));
    }
}
