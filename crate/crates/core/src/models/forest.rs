//! Tree ensembles: bagging (random forest, majority vote) and boosting
//! (summed responses through a logistic link) share one model shape.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::models::tree::{grow_classifier, CartConfig, DecisionTree};
use crate::models::sigmoid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleMode {
    Bagging,
    Boosting,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub mode: EnsembleMode,
    /// Scales tree responses in boosting mode; 1.0 for bagging.
    pub learning_rate: f64,
    pub feature_count: usize,
    /// Class prior as a log-odds base score (boosting); unused margin
    /// offset 0 for bagging.
    pub base_score: f64,
    /// Expected ensemble output from tree structure (cover-weighted):
    /// the attribution base value.
    pub base_value: f64,
}

impl ForestModel {
    /// Per-tree output in ensemble-combination space: the 0/1 vote for
    /// bagging (leaf-probability ties vote benign), the raw response
    /// for boosting.
    pub fn tree_output(&self, tree: &DecisionTree, row: &[f64]) -> f64 {
        let v = tree.predict(row);
        match self.mode {
            EnsembleMode::Bagging => {
                if v > 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            EnsembleMode::Boosting => v,
        }
    }

    /// Same transform applied to a stored leaf value.
    pub fn leaf_output(&self, leaf_value: f64) -> f64 {
        match self.mode {
            EnsembleMode::Bagging => {
                if leaf_value > 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            EnsembleMode::Boosting => leaf_value,
        }
    }

    /// (offset, scale) combining per-tree outputs into the raw model
    /// output: bagging averages votes, boosting sums scaled responses
    /// on top of the base score.
    pub fn combination(&self) -> (f64, f64) {
        match self.mode {
            EnsembleMode::Bagging => (0.0, 1.0 / self.trees.len().max(1) as f64),
            EnsembleMode::Boosting => (self.base_score, self.learning_rate),
        }
    }

    /// Raw output: vote fraction (bagging) or margin (boosting).
    pub fn raw_output(&self, row: &[f64]) -> f64 {
        let (offset, scale) = self.combination();
        let sum: f64 = self
            .trees
            .iter()
            .map(|t| self.tree_output(t, row))
            .sum();
        offset + scale * sum
    }

    /// Phishing probability.
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        match self.mode {
            EnsembleMode::Bagging => self.raw_output(row),
            EnsembleMode::Boosting => sigmoid(self.raw_output(row)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Bootstrap resampling on by default; off makes a single tree
    /// reproduce plain CART.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 300,
            max_depth: None,
            min_leaf: 1,
            bootstrap: true,
            seed: 0,
        }
    }
}

pub(crate) fn check_trainable(matrix: &FeatureMatrix) -> Result<()> {
    if matrix.n_rows() < 2 {
        return Err(Error::DegenerateTraining(format!(
            "need >= 2 samples, got {}",
            matrix.n_rows()
        )));
    }
    let positives = matrix.labels.iter().filter(|l| l.index() == 1).count();
    if positives == 0 || positives == matrix.n_rows() {
        return Err(Error::DegenerateTraining(
            "training data contains a single class".into(),
        ));
    }
    Ok(())
}

/// Bagged CART forest: bootstrap resamples, Gini splits over
/// floor(sqrt(feature_count)) candidate features per split. Each tree
/// draws from its own counter-derived RNG stream, so results do not
/// depend on worker count or tree-count changes upstream of it.
pub fn train_random_forest(matrix: &FeatureMatrix, config: &ForestConfig) -> Result<ForestModel> {
    check_trainable(matrix)?;
    let n = matrix.n_rows();
    let candidates = (matrix.width() as f64).sqrt().floor().max(1.0) as usize;
    let cart = CartConfig {
        max_depth: config.max_depth,
        min_leaf: config.min_leaf,
        candidate_features: Some(candidates.min(matrix.width())),
    };

    let trees = crate::par::map_range(config.n_trees, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(t as u64);
        let indices: Vec<usize> = if config.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        grow_classifier(matrix, &indices, &cart, &mut rng)
    });

    let mut model = ForestModel {
        trees,
        mode: EnsembleMode::Bagging,
        learning_rate: 1.0,
        feature_count: matrix.width(),
        base_score: 0.0,
        base_value: 0.0,
    };
    model.base_value = expected_raw_output(&model);
    Ok(model)
}

/// Expected raw output from tree structure alone (cover-weighted leaf
/// means), matching the attribution base value exactly.
pub fn expected_raw_output(model: &ForestModel) -> f64 {
    let (offset, scale) = model.combination();
    let sum: f64 = model
        .trees
        .iter()
        .map(|t| expected_tree_output(model, t, t.root()))
        .sum();
    offset + scale * sum
}

fn expected_tree_output(model: &ForestModel, tree: &DecisionTree, at: usize) -> f64 {
    use crate::models::tree::Node;
    match &tree.nodes[at] {
        Node::Leaf { value, .. } => model.leaf_output(*value),
        Node::Split {
            left, right, cover, ..
        } => {
            let lw = tree.cover(*left) / cover;
            let rw = tree.cover(*right) / cover;
            lw * expected_tree_output(model, tree, *left)
                + rw * expected_tree_output(model, tree, *right)
        }
    }
}
