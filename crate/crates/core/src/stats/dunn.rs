//! Dunn's pairwise rank comparison, the follow-up to a rejected
//! Kruskal-Wallis test, with Holm-Bonferroni adjusted p-values.

use crate::error::{Error, Result};
use crate::stats::holm::holm_bonferroni;
use crate::stats::kruskal::rank_groups;
use crate::stats::rank::tie_cubic_term;
use crate::stats::special::normal_sf;
use crate::stats::{StatTestResult, TestMethod};

/// One result per unordered group pair (i < j), in lexicographic order.
///
/// The default denominator is sqrt((N(N+1)/12)(1/n_i + 1/n_j)) with no
/// tie term; `tie_correction` subtracts sum(t^3 - t)/(12(N-1)) from the
/// variance factor instead.
pub fn dunn_pairwise(groups: &[Vec<f64>], tie_correction: bool) -> Result<Vec<StatTestResult>> {
    if groups.len() < 2 {
        return Err(Error::Validation("dunn needs >= 2 groups".into()));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::Validation("empty group".into()));
    }
    let summary = rank_groups(groups)?;
    let n = summary.total as f64;

    let mut variance = n * (n + 1.0) / 12.0;
    if tie_correction {
        variance -= tie_cubic_term(&summary.tie_group_sizes) / (12.0 * (n - 1.0));
    }

    let k = groups.len();
    let mut results = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in (i + 1)..k {
            let ni = summary.group_sizes[i] as f64;
            let nj = summary.group_sizes[j] as f64;
            let se = (variance * (1.0 / ni + 1.0 / nj)).sqrt();
            let z = if se == 0.0 {
                0.0
            } else {
                (summary.mean_ranks[i] - summary.mean_ranks[j]) / se
            };
            let p = (2.0 * normal_sf(z.abs())).min(1.0);
            results.push(StatTestResult {
                method: TestMethod::Dunn,
                statistic: z,
                p,
                p_adj: None,
                pair: Some((i, j)),
            });
        }
    }

    let adjusted = holm_bonferroni(&results.iter().map(|r| r.p).collect::<Vec<_>>())?;
    for (r, adj) in results.iter_mut().zip(adjusted) {
        r.p_adj = Some(adj);
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_groups_z_zero_p_one() {
        let g = vec![1.0, 2.0, 3.0];
        let res = dunn_pairwise(&[g.clone(), g], false).unwrap();
        assert_eq!(res.len(), 1);
        assert!(res[0].statistic.abs() < 1e-12);
        assert!((res[0].p - 1.0).abs() < 1e-12);
        assert!((res[0].p_adj.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pair_count_for_13_groups() {
        let groups: Vec<Vec<f64>> = (0..13).map(|i| vec![i as f64, i as f64 + 0.5]).collect();
        let res = dunn_pairwise(&groups, false).unwrap();
        assert_eq!(res.len(), 78);
    }

    #[test]
    fn z_antisymmetry() {
        let a = vec![1.0, 2.0, 3.0, 4.0];
        let b = vec![5.0, 6.0, 7.0];
        let c = vec![2.5, 3.5];
        let fwd = dunn_pairwise(&[a.clone(), b.clone(), c.clone()], false).unwrap();
        let rev = dunn_pairwise(&[b, a, c], false).unwrap();
        // pair (0,1) swaps roles between the two calls
        assert!((fwd[0].statistic + rev[0].statistic).abs() < 1e-12);
        assert!((fwd[0].p - rev[0].p).abs() < 1e-15);
    }

    #[test]
    fn hand_computed_z() {
        // groups [1,2],[3,4]: mean ranks 1.5 and 3.5, N=4
        // Z = (1.5-3.5)/sqrt((4*5/12)*(1/2+1/2)) = -2/sqrt(5/3)
        let res = dunn_pairwise(&[vec![1.0, 2.0], vec![3.0, 4.0]], false).unwrap();
        let want = -2.0 / (5.0f64 / 3.0).sqrt();
        assert!((res[0].statistic - want).abs() < 1e-12);
    }

    #[test]
    fn p_adj_dominates_p() {
        let groups: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..5).map(|j| (i * 7 + j * 3) as f64).collect())
            .collect();
        for r in dunn_pairwise(&groups, false).unwrap() {
            let adj = r.p_adj.unwrap();
            assert!(adj >= r.p - 1e-15);
            assert!(adj <= 1.0);
        }
    }

    #[test]
    fn tie_correction_shrinks_variance() {
        let a = vec![1.0, 1.0, 2.0, 2.0];
        let b = vec![2.0, 3.0, 3.0, 4.0];
        let c = vec![4.0, 4.0, 5.0, 5.0];
        let plain = dunn_pairwise(&[a.clone(), b.clone(), c.clone()], false).unwrap();
        let tied = dunn_pairwise(&[a, b, c], true).unwrap();
        // same mean-rank difference over a smaller denominator
        assert!(tied[0].statistic.abs() > plain[0].statistic.abs());
    }
}
