//! Exhaustive grid search over hyperparameter lattices, scored by mean
//! cross-validation accuracy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::models::{train_model, Hyperparams, ModelFamily};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridRow {
    pub params: Hyperparams,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

/// The recorded default search space per family.
pub fn default_grid(family: ModelFamily) -> Vec<Hyperparams> {
    let base = Hyperparams::default();
    let mut grid = Vec::new();
    match family {
        ModelFamily::RandomForest => {
            for &n_trees in &[100, 300, 500] {
                for &max_depth in &[Some(8), Some(16), None] {
                    grid.push(Hyperparams {
                        n_trees,
                        max_depth,
                        ..base.clone()
                    });
                }
            }
        }
        ModelFamily::Gbdt => {
            for &n_trees in &[100, 300, 500] {
                for &max_depth in &[Some(8), Some(16), None] {
                    for &learning_rate in &[0.05, 0.1, 0.3] {
                        grid.push(Hyperparams {
                            n_trees,
                            max_depth,
                            learning_rate,
                            ..base.clone()
                        });
                    }
                }
            }
        }
        ModelFamily::Knn => {
            for &k in &[1, 3, 5, 7, 9, 15] {
                grid.push(Hyperparams { k, ..base.clone() });
            }
        }
        ModelFamily::Logistic | ModelFamily::Svm => {
            for &l2 in &[1e-4, 1e-2, 1.0] {
                grid.push(Hyperparams { l2, ..base.clone() });
            }
        }
    }
    grid
}

/// Capacity ordering for tie-breaks: fewest trees, then shallowest,
/// then the remaining axes in a fixed order.
fn capacity_key(p: &Hyperparams) -> (usize, usize, u64, usize, u64, usize) {
    (
        p.n_trees,
        p.max_depth.unwrap_or(usize::MAX),
        p.learning_rate.to_bits(),
        p.k,
        p.l2.to_bits(),
        p.max_iters,
    )
}

/// Evaluates every grid point with the given fold plan (test-index
/// lists over `matrix`) and returns the winner plus the full table.
/// Best mean accuracy wins; ties go to the smallest capacity, then to
/// the earliest grid position.
pub fn grid_search(
    family: ModelFamily,
    grid: &[Hyperparams],
    matrix: &FeatureMatrix,
    fold_test_indices: &[Vec<usize>],
    seed: u64,
) -> Result<(Hyperparams, Vec<GridRow>)> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("empty hyperparameter grid".into()));
    }
    if fold_test_indices.is_empty() {
        return Err(Error::EmptyInput("no folds".into()));
    }

    let all: Vec<usize> = (0..matrix.n_rows()).collect();
    let rows: Vec<GridRow> = grid
        .iter()
        .map(|params| {
            let mut fold_accuracies = Vec::with_capacity(fold_test_indices.len());
            for test_idx in fold_test_indices {
                let train_idx: Vec<usize> = all
                    .iter()
                    .copied()
                    .filter(|i| !test_idx.contains(i))
                    .collect();
                let train = matrix.select(&train_idx);
                let test = matrix.select(test_idx);
                let model = train_model(family, &train, params, seed)?;
                let preds = model.predict(&test)?;
                let correct = preds
                    .iter()
                    .zip(0..test.n_rows())
                    .filter(|(p, i)| p.label == test.label(*i))
                    .count();
                fold_accuracies.push(correct as f64 / test.n_rows() as f64);
            }
            let mean_accuracy =
                fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
            Ok(GridRow {
                params: params.clone(),
                fold_accuracies,
                mean_accuracy,
            })
        })
        .collect::<Result<_>>()?;

    let best = rows
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| {
            b.mean_accuracy
                .total_cmp(&a.mean_accuracy)
                .then_with(|| capacity_key(&a.params).cmp(&capacity_key(&b.params)))
                .then(ia.cmp(ib))
        })
        .map(|(_, row)| row.params.clone())
        .expect("grid is non-empty");
    Ok((best, rows))
}
