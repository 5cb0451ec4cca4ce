//! Friedman test for repeated measures across blocks.

use crate::error::{Error, Result};
use crate::stats::rank::average_ranks;
use crate::stats::special::chi_square_sf;
use crate::stats::{StatTestResult, TestMethod};

/// `block_matrix[t][b]` holds treatment t's value in block b. Ranks are
/// assigned within each block (midranks on ties); the statistic is
/// chi_F^2 = 12n/(k(k+1)) * sum_j Rbar_j^2 - 3n(k+1) on k - 1 degrees
/// of freedom.
pub fn friedman(block_matrix: &[Vec<f64>]) -> Result<StatTestResult> {
    let k = block_matrix.len();
    if k < 2 {
        return Err(Error::Validation("friedman needs >= 2 treatments".into()));
    }
    let n = block_matrix[0].len();
    if n < 2 {
        return Err(Error::Validation("friedman needs >= 2 blocks".into()));
    }
    if block_matrix.iter().any(|row| row.len() != n) {
        return Err(Error::Validation("ragged block matrix".into()));
    }

    // mean rank per treatment across blocks
    let mut rank_sums = vec![0.0; k];
    for b in 0..n {
        let column: Vec<f64> = block_matrix.iter().map(|row| row[b]).collect();
        let (ranks, _) = average_ranks(&column)?;
        for (t, r) in ranks.into_iter().enumerate() {
            rank_sums[t] += r;
        }
    }
    let nf = n as f64;
    let kf = k as f64;
    let sum_rbar2: f64 = rank_sums.iter().map(|&r| (r / nf) * (r / nf)).sum();
    let statistic = 12.0 * nf / (kf * (kf + 1.0)) * sum_rbar2 - 3.0 * nf * (kf + 1.0);
    // midranks can leave a slightly negative zero
    let statistic = statistic.max(0.0);
    let p = chi_square_sf(statistic, k - 1);
    Ok(StatTestResult {
        method: TestMethod::Friedman,
        statistic,
        p,
        p_adj: None,
        pair: None,
    })
}

/// Mean within-block ranks in "1 is best" orientation (descending
/// values), as used by critical-difference displays.
pub fn mean_ranks_descending(block_matrix: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k = block_matrix.len();
    if k == 0 {
        return Err(Error::Validation("empty matrix".into()));
    }
    let n = block_matrix[0].len();
    let mut rank_sums = vec![0.0; k];
    for b in 0..n {
        let column: Vec<f64> = block_matrix.iter().map(|row| -row[b]).collect();
        let (ranks, _) = average_ranks(&column)?;
        for (t, r) in ranks.into_iter().enumerate() {
            rank_sums[t] += r;
        }
    }
    Ok(rank_sums.into_iter().map(|r| r / n as f64).collect())
}
