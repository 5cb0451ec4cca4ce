//! k-nearest-neighbour classification under Euclidean distance.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// The training matrix is the model.
#[derive(Debug, Clone)]
pub struct KnnModel {
    pub train: FeatureMatrix,
    pub k: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
    pub label: Label,
}

/// Majority vote among the k nearest training points. Distance ties at
/// the boundary resolve by training index (lower first); vote ties
/// resolve to benign.
pub fn knn_predict(
    train: &FeatureMatrix,
    query: &[f64],
    k: usize,
) -> Result<(Label, Vec<Neighbor>)> {
    let n = train.n_rows();
    if n == 0 {
        return Err(Error::EmptyInput("empty training set".into()));
    }
    if k == 0 || k > n {
        return Err(Error::Validation(format!(
            "k = {k} out of range for {n} training samples"
        )));
    }
    if query.len() != train.width() {
        return Err(Error::DimensionMismatch {
            expected: train.width(),
            got: query.len(),
        });
    }

    let mut scored: Vec<(f64, usize)> = (0..n)
        .map(|i| (squared_distance(train.row(i), query), i))
        .collect();
    scored.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.truncate(k);

    let neighbors: Vec<Neighbor> = scored
        .into_iter()
        .map(|(d2, i)| Neighbor {
            index: i,
            distance: d2.sqrt(),
            label: train.label(i),
        })
        .collect();
    let votes = neighbors
        .iter()
        .filter(|nb| nb.label == Label::Phishing)
        .count();
    let label = if 2 * votes > k {
        Label::Phishing
    } else {
        Label::Benign
    };
    Ok((label, neighbors))
}

/// Phishing vote fraction for a query.
pub fn knn_proba(train: &FeatureMatrix, query: &[f64], k: usize) -> Result<f64> {
    let (_, neighbors) = knn_predict(train, query, k)?;
    let votes = neighbors
        .iter()
        .filter(|nb| nb.label == Label::Phishing)
        .count();
    Ok(votes as f64 / k as f64)
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}
