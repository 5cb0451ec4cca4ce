//! Inputs for a critical-difference display: mean ranks plus a pairwise
//! significance matrix from Wilcoxon signed-rank tests under Holm.

use crate::error::{Error, Result};
use crate::stats::friedman::mean_ranks_descending;
use crate::stats::holm::holm_bonferroni;
use crate::stats::wilcoxon::wilcoxon_signed_rank;

#[derive(Debug, Clone)]
pub struct PairwiseComparison {
    pub i: usize,
    pub j: usize,
    pub statistic: f64,
    pub p: f64,
    pub p_adj: f64,
    pub significant: bool,
}

#[derive(Debug, Clone)]
pub struct CddInputs {
    /// Mean within-block rank per treatment, rank 1 = best.
    pub mean_ranks: Vec<f64>,
    pub pairs: Vec<PairwiseComparison>,
    pub alpha: f64,
}

/// `block_matrix[t][b]`: treatment t's value in block b. Pairs whose
/// differences are all zero carry no evidence and are reported with
/// p = 1.
pub fn cdd_inputs(block_matrix: &[Vec<f64>], alpha: f64) -> Result<CddInputs> {
    let k = block_matrix.len();
    if k < 2 {
        return Err(Error::Validation("need >= 2 treatments".into()));
    }
    let mean_ranks = mean_ranks_descending(block_matrix)?;

    let mut pairs = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in (i + 1)..k {
            let (stat, p) = match wilcoxon_signed_rank(&block_matrix[i], &block_matrix[j]) {
                Ok(r) => (r.statistic, r.p),
                Err(Error::DegenerateSample(_)) => (0.0, 1.0),
                Err(e) => return Err(e),
            };
            pairs.push(PairwiseComparison {
                i,
                j,
                statistic: stat,
                p,
                p_adj: 1.0,
                significant: false,
            });
        }
    }
    let adjusted = holm_bonferroni(&pairs.iter().map(|c| c.p).collect::<Vec<_>>())?;
    for (pair, adj) in pairs.iter_mut().zip(adjusted) {
        pair.p_adj = adj;
        pair.significant = adj < alpha;
    }
    Ok(CddInputs {
        mean_ranks,
        pairs,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominant_model_gets_rank_one() {
        let m = vec![
            vec![0.95, 0.96, 0.94, 0.97, 0.95],
            vec![0.80, 0.81, 0.79, 0.82, 0.80],
            vec![0.70, 0.71, 0.69, 0.72, 0.70],
        ];
        let cdd = cdd_inputs(&m, 0.05).unwrap();
        assert_eq!(cdd.mean_ranks, vec![1.0, 2.0, 3.0]);
        // n=5 blocks: minimum exact two-sided p is 2/32 = 0.0625, so no
        // pair can clear 0.05 at this resolution even under dominance.
        for pair in &cdd.pairs {
            assert!((pair.p - 0.0625).abs() < 1e-12);
            assert!(!pair.significant);
        }
    }

    #[test]
    fn identical_models_no_significance_equal_ranks() {
        let row = vec![0.9, 0.8, 0.85];
        let m = vec![row.clone(), row.clone(), row];
        let cdd = cdd_inputs(&m, 0.05).unwrap();
        assert_eq!(cdd.mean_ranks, vec![2.0, 2.0, 2.0]);
        assert!(cdd.pairs.iter().all(|p| !p.significant && p.p_adj == 1.0));
    }
}
