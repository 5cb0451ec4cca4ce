//! Binary CART decision tree: Gini splits on midpoint thresholds, with
//! node covers kept for attribution.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::features::FeatureMatrix;

/// Arena node. Routing: `row[feature] < threshold` goes left.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// training samples that reached this node
        cover: f64,
    },
    Leaf {
        /// phishing probability (classification) or response (boosting)
        value: f64,
        cover: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn root(&self) -> usize {
        0
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    at = if row[*feature] < *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn cover(&self, node: usize) -> f64 {
        match &self.nodes[node] {
            Node::Split { cover, .. } | Node::Leaf { cover, .. } => *cover,
        }
    }

    /// Cover-weighted mean leaf value: the tree's expected output over
    /// the sample it was grown on.
    pub fn expected_output(&self) -> f64 {
        fn walk(tree: &DecisionTree, at: usize) -> f64 {
            match &tree.nodes[at] {
                Node::Leaf { value, cover } => value * cover,
                Node::Split { left, right, .. } => {
                    walk(tree, *left) + walk(tree, *right)
                }
            }
        }
        walk(self, 0) / self.cover(0)
    }

    pub fn max_depth(&self) -> usize {
        fn walk(tree: &DecisionTree, at: usize) -> usize {
            match &tree.nodes[at] {
                Node::Leaf { .. } => 1,
                Node::Split { left, right, .. } => {
                    1 + walk(tree, *left).max(walk(tree, *right))
                }
            }
        }
        walk(self, 0)
    }
}

#[derive(Debug, Clone)]
pub struct CartConfig {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Split candidates per node; `None` considers every feature.
    pub candidate_features: Option<usize>,
}

impl Default for CartConfig {
    fn default() -> Self {
        CartConfig {
            max_depth: None,
            min_leaf: 1,
            candidate_features: None,
        }
    }
}

/// Grows a classification tree on the given sample indices (duplicates
/// allowed, as produced by bootstrap resampling). Labels are taken from
/// the matrix; leaf values are phishing fractions.
pub fn grow_classifier(
    matrix: &FeatureMatrix,
    indices: &[usize],
    config: &CartConfig,
    rng: &mut impl Rng,
) -> DecisionTree {
    let mut nodes = Vec::new();
    let mut scratch = Vec::new();
    build(
        matrix,
        indices.to_vec(),
        0,
        config,
        rng,
        &mut nodes,
        &mut scratch,
    );
    DecisionTree { nodes }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

fn build(
    matrix: &FeatureMatrix,
    indices: Vec<usize>,
    depth: usize,
    config: &CartConfig,
    rng: &mut impl Rng,
    nodes: &mut Vec<Node>,
    scratch: &mut Vec<(f64, u8)>,
) -> usize {
    let n = indices.len();
    let positives = indices
        .iter()
        .filter(|&&i| matrix.label(i).index() == 1)
        .count();
    let make_leaf = |nodes: &mut Vec<Node>| {
        nodes.push(Node::Leaf {
            value: positives as f64 / n as f64,
            cover: n as f64,
        });
        nodes.len() - 1
    };

    let depth_exhausted = config.max_depth.is_some_and(|d| depth >= d);
    if positives == 0 || positives == n || n < 2 * config.min_leaf || depth_exhausted {
        return make_leaf(nodes);
    }

    let best = find_best_split(matrix, &indices, positives, config, rng, scratch);
    let Some(best) = best else {
        return make_leaf(nodes);
    };

    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .into_iter()
        .partition(|&i| matrix.row(i)[best.feature] < best.threshold);

    let here = nodes.len();
    nodes.push(Node::Leaf {
        value: 0.0,
        cover: n as f64,
    }); // placeholder
    let left = build(matrix, left_idx, depth + 1, config, rng, nodes, scratch);
    let right = build(matrix, right_idx, depth + 1, config, rng, nodes, scratch);
    nodes[here] = Node::Split {
        feature: best.feature,
        threshold: best.threshold,
        left,
        right,
        cover: n as f64,
    };
    here
}

fn find_best_split(
    matrix: &FeatureMatrix,
    indices: &[usize],
    positives: usize,
    config: &CartConfig,
    rng: &mut impl Rng,
    scratch: &mut Vec<(f64, u8)>,
) -> Option<BestSplit> {
    let width = matrix.width();
    let candidates: Vec<usize> = match config.candidate_features {
        Some(k) if k < width => sample_distinct(width, k, rng),
        _ => (0..width).collect(),
    };

    let n = indices.len() as f64;
    let total_pos = positives as f64;
    let mut best: Option<BestSplit> = None;

    for feature in candidates {
        scratch.clear();
        scratch.extend(
            indices
                .iter()
                .map(|&i| (matrix.row(i)[feature], matrix.label(i).index() as u8)),
        );
        scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        if scratch[0].0 == scratch[scratch.len() - 1].0 {
            continue; // zero variance
        }

        let mut left_n = 0.0;
        let mut left_pos = 0.0;
        for w in 0..scratch.len() - 1 {
            left_n += 1.0;
            left_pos += scratch[w].1 as f64;
            if scratch[w].0 == scratch[w + 1].0 {
                continue; // not a boundary between distinct values
            }
            let right_n = n - left_n;
            if (left_n as usize) < config.min_leaf || (right_n as usize) < config.min_leaf {
                continue;
            }
            let right_pos = total_pos - left_pos;
            // minimize weighted child Gini = maximize sum of p^2/n terms
            let score = (left_pos * left_pos + (left_n - left_pos) * (left_n - left_pos))
                / left_n
                + (right_pos * right_pos + (right_n - right_pos) * (right_n - right_pos))
                    / right_n;
            if best.as_ref().is_none_or(|b| score > b.score) {
                best = Some(BestSplit {
                    feature,
                    threshold: (scratch[w].0 + scratch[w + 1].0) / 2.0,
                    score,
                });
            }
        }
    }

    // a split must actually improve over the parent
    let parent_score = (total_pos * total_pos
        + (n - total_pos) * (n - total_pos))
        / n;
    best.filter(|b| b.score > parent_score + 1e-12)
}

/// k distinct values from 0..width by partial Fisher-Yates, sorted for
/// a deterministic evaluation order.
fn sample_distinct(width: usize, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..width).collect();
    for i in 0..k {
        let j = rng.random_range(i..width);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool.sort_unstable();
    pool
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn matrix(rows: &[(&[f64], Label)]) -> FeatureMatrix {
        let width = rows[0].0.len();
        let cols = (0..width).map(|i| format!("f{i}")).collect();
        let mut m = FeatureMatrix::new(cols);
        for (i, (row, label)) in rows.iter().enumerate() {
            m.push_row(format!("s{i}"), *label, row).unwrap();
        }
        m
    }

    #[test]
    fn separable_data_perfect_fit() {
        let m = matrix(&[
            (&[0.0], Label::Benign),
            (&[1.0], Label::Benign),
            (&[5.0], Label::Phishing),
            (&[6.0], Label::Phishing),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = grow_classifier(&m, &[0, 1, 2, 3], &CartConfig::default(), &mut rng);
        for i in 0..4 {
            let p = tree.predict(m.row(i));
            assert_eq!(p > 0.5, m.label(i) == Label::Phishing);
        }
    }

    #[test]
    fn pure_node_is_leaf() {
        let m = matrix(&[(&[0.0], Label::Benign), (&[1.0], Label::Benign)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = grow_classifier(&m, &[0, 1], &CartConfig::default(), &mut rng);
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.predict(&[0.5]), 0.0);
    }

    #[test]
    fn depth_limit_respected() {
        let rows: Vec<(Vec<f64>, Label)> = (0..32)
            .map(|i| {
                (
                    vec![i as f64],
                    if i % 2 == 0 { Label::Benign } else { Label::Phishing },
                )
            })
            .collect();
        let refs: Vec<(&[f64], Label)> = rows.iter().map(|(r, l)| (r.as_slice(), *l)).collect();
        let m = matrix(&refs);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cfg = CartConfig {
            max_depth: Some(3),
            ..CartConfig::default()
        };
        let idx: Vec<usize> = (0..32).collect();
        let tree = grow_classifier(&m, &idx, &cfg, &mut rng);
        assert!(tree.max_depth() <= 4); // 3 splits + leaf level
    }

    #[test]
    fn expected_output_is_cover_weighted() {
        let m = matrix(&[
            (&[0.0], Label::Benign),
            (&[1.0], Label::Benign),
            (&[2.0], Label::Benign),
            (&[5.0], Label::Phishing),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = grow_classifier(&m, &[0, 1, 2, 3], &CartConfig::default(), &mut rng);
        assert!((tree.expected_output() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_features_skipped() {
        // constant feature 0; signal on feature 1
        let m = matrix(&[
            (&[7.0, 0.0], Label::Benign),
            (&[7.0, 1.0], Label::Benign),
            (&[7.0, 5.0], Label::Phishing),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tree = grow_classifier(&m, &[0, 1, 2], &CartConfig::default(), &mut rng);
        match &tree.nodes[0] {
            Node::Split { feature, .. } => assert_eq!(*feature, 1),
            other => panic!("expected split, got {other:?}"),
        }
    }
}
