//! Ranking with midrank tie handling.

use crate::error::{Error, Result};

/// 1-based average ranks of `values`, plus the run length of every
/// tied-value group (length-1 runs included; they contribute nothing to
/// tie corrections since t^3 - t = 0).
pub fn average_ranks(values: &[f64]) -> Result<(Vec<f64>, Vec<usize>)> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("non-finite value in ranking input".into()));
    }
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());

    let mut ranks = vec![0.0; n];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share the average of ranks i+1..j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        tie_sizes.push(j - i);
        i = j;
    }
    Ok((ranks, tie_sizes))
}

/// Sum of t^3 - t over tie groups.
pub fn tie_cubic_term(tie_sizes: &[usize]) -> f64 {
    tie_sizes
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum()
}
