//! Gradient-boosted regression trees on the logistic loss, standing in
//! for the XGBoost/LightGBM/CatBoost family: per round a tree is fit to
//! (gradient, hessian) pairs with Newton leaf values, and the model
//! predicts through sigmoid(base_score + lr * sum of tree outputs).
//!
//! Split search is exact greedy over presorted columns, expanded level
//! by level so one pass per feature serves every node of a level.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::FeatureMatrix;
use crate::models::forest::{check_trainable, expected_raw_output, EnsembleMode, ForestModel};
use crate::models::sigmoid;
use crate::models::tree::{DecisionTree, Node};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GbdtConfig {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub reg_lambda: f64,
    pub min_leaf: usize,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        GbdtConfig {
            n_rounds: 100,
            max_depth: 6,
            learning_rate: 0.3,
            reg_lambda: 1.0,
            min_leaf: 1,
        }
    }
}

pub fn train_gbdt(matrix: &FeatureMatrix, config: &GbdtConfig) -> Result<ForestModel> {
    check_trainable(matrix)?;
    let n = matrix.n_rows();
    let positives = matrix.labels.iter().filter(|l| l.index() == 1).count() as f64;
    let prior = positives / n as f64;
    let base_score = (prior / (1.0 - prior)).ln();

    // one sort per feature, reused across every round and level
    let sorted_cols: Vec<Vec<u32>> = crate::par::map_range(matrix.width(), |f| {
        let mut idx: Vec<u32> = (0..n as u32).collect();
        idx.sort_unstable_by(|&a, &b| {
            matrix.row(a as usize)[f].total_cmp(&matrix.row(b as usize)[f])
        });
        idx
    });

    let mut margins = vec![base_score; n];
    let mut trees = Vec::with_capacity(config.n_rounds);
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    for _ in 0..config.n_rounds {
        for i in 0..n {
            let p = sigmoid(margins[i]);
            let y = matrix.label(i).index() as f64;
            grad[i] = p - y;
            hess[i] = p * (1.0 - p);
        }
        let (tree, leaf_of) = grow_regression_tree(matrix, &sorted_cols, &grad, &hess, config);
        for i in 0..n {
            if let Node::Leaf { value, .. } = tree.nodes[leaf_of[i] as usize] {
                margins[i] += config.learning_rate * value;
            }
        }
        trees.push(tree);
    }

    let mut model = ForestModel {
        trees,
        mode: EnsembleMode::Boosting,
        learning_rate: config.learning_rate,
        feature_count: matrix.width(),
        base_score,
        base_value: 0.0,
    };
    model.base_value = expected_raw_output(&model);
    Ok(model)
}

struct NodeStats {
    g: f64,
    h: f64,
    count: usize,
}

#[derive(Clone)]
struct SplitCandidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Per-level scan state for one (feature, node) pair.
#[derive(Clone, Copy)]
struct ScanState {
    left_g: f64,
    left_h: f64,
    left_count: usize,
    prev_value: f64,
    seen: bool,
    best_gain: f64,
    best_threshold: f64,
}

const GAIN_EPS: f64 = 1e-12;

fn leaf_value(g: f64, h: f64, lambda: f64) -> f64 {
    -g / (h + lambda)
}

fn split_gain(stats: &NodeStats, gl: f64, hl: f64, lambda: f64) -> f64 {
    let gr = stats.g - gl;
    let hr = stats.h - hl;
    gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - stats.g * stats.g / (stats.h + lambda)
}

fn grow_regression_tree(
    matrix: &FeatureMatrix,
    sorted_cols: &[Vec<u32>],
    grad: &[f64],
    hess: &[f64],
    config: &GbdtConfig,
) -> (DecisionTree, Vec<u32>) {
    let n = matrix.n_rows();
    let lambda = config.reg_lambda;

    let mut nodes: Vec<Node> = Vec::new();
    let mut stats: Vec<NodeStats> = Vec::new();
    let root_stats = NodeStats {
        g: grad.iter().sum(),
        h: hess.iter().sum(),
        count: n,
    };
    nodes.push(Node::Leaf {
        value: leaf_value(root_stats.g, root_stats.h, lambda),
        cover: n as f64,
    });
    stats.push(root_stats);

    let mut node_of: Vec<u32> = vec![0; n];
    let mut active: Vec<usize> = vec![0];

    for _level in 0..config.max_depth {
        if active.is_empty() {
            break;
        }
        // slot lookup: node id -> position in `active`, -1 elsewhere
        let mut slot_of = vec![-1i32; nodes.len()];
        for (s, &id) in active.iter().enumerate() {
            if stats[id].count >= 2 * config.min_leaf {
                slot_of[id] = s as i32;
            }
        }

        // per feature, one sweep over its sorted order serving all slots
        let per_feature: Vec<Vec<Option<SplitCandidate>>> =
            crate::par::map_range(matrix.width(), |f| {
                let mut states = vec![
                    ScanState {
                        left_g: 0.0,
                        left_h: 0.0,
                        left_count: 0,
                        prev_value: 0.0,
                        seen: false,
                        best_gain: GAIN_EPS,
                        best_threshold: 0.0,
                    };
                    active.len()
                ];
                for &iu in &sorted_cols[f] {
                    let i = iu as usize;
                    let slot = slot_of[node_of[i] as usize];
                    if slot < 0 {
                        continue;
                    }
                    let slot = slot as usize;
                    let value = matrix.row(i)[f];
                    let st = &mut states[slot];
                    if st.seen && value != st.prev_value {
                        let node_stats = &stats[active[slot]];
                        let right_count = node_stats.count - st.left_count;
                        if st.left_count >= config.min_leaf && right_count >= config.min_leaf {
                            let gain = split_gain(node_stats, st.left_g, st.left_h, lambda);
                            if gain > st.best_gain {
                                st.best_gain = gain;
                                st.best_threshold = (st.prev_value + value) / 2.0;
                            }
                        }
                    }
                    st.left_g += grad[i];
                    st.left_h += hess[i];
                    st.left_count += 1;
                    st.prev_value = value;
                    st.seen = true;
                }
                states
                    .into_iter()
                    .map(|st| {
                        (st.best_gain > GAIN_EPS).then_some(SplitCandidate {
                            gain: st.best_gain,
                            feature: f,
                            threshold: st.best_threshold,
                        })
                    })
                    .collect()
            });

        // best candidate per slot; ties resolve to the lower feature
        // index because features are visited in order
        let mut winners: Vec<Option<SplitCandidate>> = vec![None; active.len()];
        for per_slot in &per_feature {
            for (slot, cand) in per_slot.iter().enumerate() {
                if let Some(c) = cand {
                    if winners[slot].as_ref().is_none_or(|w| c.gain > w.gain) {
                        winners[slot] = Some(c.clone());
                    }
                }
            }
        }

        let mut next_active = Vec::new();
        let mut split_of = vec![-1i32; nodes.len()];
        for (slot, &id) in active.iter().enumerate() {
            let Some(winner) = &winners[slot] else {
                continue; // stays a leaf with its Newton value
            };
            let left = nodes.len();
            let right = nodes.len() + 1;
            nodes.push(Node::Leaf {
                value: 0.0,
                cover: 0.0,
            });
            nodes.push(Node::Leaf {
                value: 0.0,
                cover: 0.0,
            });
            stats.push(NodeStats {
                g: 0.0,
                h: 0.0,
                count: 0,
            });
            stats.push(NodeStats {
                g: 0.0,
                h: 0.0,
                count: 0,
            });
            nodes[id] = Node::Split {
                feature: winner.feature,
                threshold: winner.threshold,
                left,
                right,
                cover: stats[id].count as f64,
            };
            split_of[id] = left as i32; // children are left, left+1
            next_active.push(left);
            next_active.push(right);
        }

        if next_active.is_empty() {
            break;
        }
        // route samples of split nodes into their children
        for i in 0..n {
            let id = node_of[i] as usize;
            if split_of[id] < 0 {
                continue;
            }
            let child = match nodes[id] {
                Node::Split {
                    feature, threshold, ..
                } => {
                    if matrix.row(i)[feature] < threshold {
                        split_of[id] as usize
                    } else {
                        split_of[id] as usize + 1
                    }
                }
                Node::Leaf { .. } => unreachable!(),
            };
            node_of[i] = child as u32;
            let st = &mut stats[child];
            st.g += grad[i];
            st.h += hess[i];
            st.count += 1;
        }
        for &child in &next_active {
            nodes[child] = Node::Leaf {
                value: leaf_value(stats[child].g, stats[child].h, lambda),
                cover: stats[child].count as f64,
            };
        }
        active = next_active;
    }

    (DecisionTree { nodes }, node_of)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;
    use crate::error::Error;

    fn matrix(rows: &[(Vec<f64>, Label)]) -> FeatureMatrix {
        let cols = (0..rows[0].0.len()).map(|i| format!("f{i}")).collect();
        let mut m = FeatureMatrix::new(cols);
        for (i, (row, label)) in rows.iter().enumerate() {
            m.push_row(format!("s{i}"), *label, row).unwrap();
        }
        m
    }

    #[test]
    fn zero_rounds_predicts_prior() {
        let m = matrix(&[
            (vec![0.0], Label::Benign),
            (vec![1.0], Label::Benign),
            (vec![2.0], Label::Benign),
            (vec![3.0], Label::Phishing),
        ]);
        let cfg = GbdtConfig {
            n_rounds: 0,
            ..GbdtConfig::default()
        };
        let model = train_gbdt(&m, &cfg).unwrap();
        assert!((model.predict_proba(&[100.0]) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn stumps_separate_1d_data() {
        let rows: Vec<(Vec<f64>, Label)> = (0..20)
            .map(|i| {
                (
                    vec![i as f64],
                    if i < 10 { Label::Benign } else { Label::Phishing },
                )
            })
            .collect();
        let m = matrix(&rows);
        let cfg = GbdtConfig {
            n_rounds: 30,
            max_depth: 1,
            learning_rate: 0.5,
            ..GbdtConfig::default()
        };
        let model = train_gbdt(&m, &cfg).unwrap();
        for i in 0..m.n_rows() {
            let p = model.predict_proba(m.row(i));
            assert_eq!(p > 0.5, m.label(i) == Label::Phishing, "row {i}: p={p}");
        }
    }

    #[test]
    fn xor_needs_depth_two() {
        let rows = vec![
            (vec![0.0, 0.0], Label::Benign),
            (vec![0.0, 1.0], Label::Phishing),
            (vec![1.0, 0.0], Label::Phishing),
            (vec![1.0, 1.0], Label::Benign),
        ];
        let m = matrix(&rows);
        let cfg = GbdtConfig {
            n_rounds: 20,
            max_depth: 2,
            learning_rate: 0.5,
            ..GbdtConfig::default()
        };
        let model = train_gbdt(&m, &cfg).unwrap();
        for i in 0..4 {
            let p = model.predict_proba(m.row(i));
            assert_eq!(p > 0.5, m.label(i) == Label::Phishing, "row {i}: p={p}");
        }
    }

    #[test]
    fn training_is_deterministic() {
        let rows: Vec<(Vec<f64>, Label)> = (0..30)
            .map(|i| {
                (
                    vec![(i % 7) as f64, (i % 3) as f64],
                    if (i % 7 + i % 3) % 2 == 0 { Label::Benign } else { Label::Phishing },
                )
            })
            .collect();
        let m = matrix(&rows);
        let a = train_gbdt(&m, &GbdtConfig::default()).unwrap();
        let b = train_gbdt(&m, &GbdtConfig::default()).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn single_class_rejected() {
        let m = matrix(&[(vec![1.0], Label::Benign), (vec![2.0], Label::Benign)]);
        assert!(matches!(
            train_gbdt(&m, &GbdtConfig::default()),
            Err(Error::DegenerateTraining(_))
        ));
    }
}
