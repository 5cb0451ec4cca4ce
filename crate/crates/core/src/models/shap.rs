//! Path-dependent TreeSHAP over the tree ensembles: exact Shapley
//! attributions of the raw model output (vote fraction for bagging,
//! margin for boosting), with split covers standing in for background
//! data.
//!
//! The path state tracks, per subset size s of the unique features met
//! so far, the quantity
//!   pweight[s] = sum over feature subsets S of size s of
//!                (prod of one_fractions in S) (prod of zero_fractions
//!                outside S) * s! (m-s)! / (m+1)!
//! which extend/unwind maintain incrementally; the Shapley weight of a
//! leaf for one feature falls out by dividing that feature back out.

use std::io::Write;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::models::forest::ForestModel;
use crate::models::tree::{DecisionTree, Node};

/// Attribution of one prediction: base_value + sum(shap_values) equals
/// `prediction` (the raw model output) to machine precision.
#[derive(Debug, Clone)]
pub struct AttributionReport {
    pub base_value: f64,
    pub shap_values: Vec<f64>,
    pub prediction: f64,
}

#[derive(Clone, Copy)]
struct PathElement {
    feature: i32,
    zero_fraction: f64,
    one_fraction: f64,
    pweight: f64,
}

fn extend(path: &mut Vec<PathElement>, zero_fraction: f64, one_fraction: f64, feature: i32) {
    let l = path.len();
    path.push(PathElement {
        feature,
        zero_fraction,
        one_fraction,
        pweight: if l == 0 { 1.0 } else { 0.0 },
    });
    for i in (0..l).rev() {
        path[i + 1].pweight += one_fraction * path[i].pweight * (i as f64 + 1.0) / (l as f64 + 1.0);
        path[i].pweight *= zero_fraction * (l as f64 - i as f64) / (l as f64 + 1.0);
    }
}

/// Removes element `k`, restoring the state as if it was never
/// extended (used when a feature reappears deeper on the path).
fn unwind(path: &mut Vec<PathElement>, k: usize) {
    let m = path.len() - 1;
    let one = path[k].one_fraction;
    let zero = path[k].zero_fraction;
    let mut next = path[m].pweight;
    for j in (0..m).rev() {
        if one != 0.0 {
            let tmp = path[j].pweight;
            path[j].pweight = next * (m as f64 + 1.0) / ((j as f64 + 1.0) * one);
            next = tmp - path[j].pweight * zero * (m as f64 - j as f64) / (m as f64 + 1.0);
        } else {
            path[j].pweight = path[j].pweight * (m as f64 + 1.0) / (zero * (m as f64 - j as f64));
        }
    }
    path.remove(k);
}

/// Shapley weight sum for element `k` with that element divided out.
fn unwound_sum(path: &[PathElement], k: usize) -> f64 {
    let m = path.len() - 1;
    let one = path[k].one_fraction;
    let zero = path[k].zero_fraction;
    let mut total = 0.0;
    if one != 0.0 {
        let mut next = path[m].pweight;
        for j in (0..m).rev() {
            let tmp = next * (m as f64 + 1.0) / ((j as f64 + 1.0) * one);
            total += tmp;
            next = path[j].pweight - tmp * zero * (m as f64 - j as f64) / (m as f64 + 1.0);
        }
    } else {
        for (j, el) in path.iter().enumerate().take(m) {
            total += el.pweight * (m as f64 + 1.0) / (zero * (m as f64 - j as f64));
        }
    }
    total
}

fn tree_shap_recurse(
    model: &ForestModel,
    tree: &DecisionTree,
    node: usize,
    row: &[f64],
    phi: &mut [f64],
    mut path: Vec<PathElement>,
    parent_zero: f64,
    parent_one: f64,
    parent_feature: i32,
) {
    extend(&mut path, parent_zero, parent_one, parent_feature);
    match &tree.nodes[node] {
        Node::Leaf { value, .. } => {
            let output = model.leaf_output(*value);
            for i in 1..path.len() {
                let w = unwound_sum(&path, i);
                phi[path[i].feature as usize] +=
                    w * (path[i].one_fraction - path[i].zero_fraction) * output;
            }
        }
        Node::Split {
            feature,
            threshold,
            left,
            right,
            cover,
        } => {
            let (hot, cold) = if row[*feature] < *threshold {
                (*left, *right)
            } else {
                (*right, *left)
            };
            let hot_fraction = tree.cover(hot) / cover;
            let cold_fraction = tree.cover(cold) / cover;

            // a feature met before has its previous occurrence folded in
            let mut incoming_zero = 1.0;
            let mut incoming_one = 1.0;
            if let Some(k) = path[1..]
                .iter()
                .position(|e| e.feature == *feature as i32)
                .map(|p| p + 1)
            {
                incoming_zero = path[k].zero_fraction;
                incoming_one = path[k].one_fraction;
                unwind(&mut path, k);
            }

            tree_shap_recurse(
                model,
                tree,
                hot,
                row,
                phi,
                path.clone(),
                incoming_zero * hot_fraction,
                incoming_one,
                *feature as i32,
            );
            tree_shap_recurse(
                model,
                tree,
                cold,
                row,
                phi,
                path,
                incoming_zero * cold_fraction,
                0.0,
                *feature as i32,
            );
        }
    }
}

/// Shapley attributions for one sample, summed across the ensemble.
pub fn tree_shap(model: &ForestModel, sample: &[f64]) -> Result<AttributionReport> {
    if sample.len() != model.feature_count {
        return Err(Error::DimensionMismatch {
            expected: model.feature_count,
            got: sample.len(),
        });
    }
    let (_, scale) = model.combination();
    let mut shap_values = vec![0.0; model.feature_count];
    for tree in &model.trees {
        let mut phi = vec![0.0; model.feature_count];
        tree_shap_recurse(model, tree, tree.root(), sample, &mut phi, Vec::new(), 1.0, 1.0, -1);
        for (acc, v) in shap_values.iter_mut().zip(phi) {
            *acc += scale * v;
        }
    }
    Ok(AttributionReport {
        base_value: model.base_value,
        shap_values,
        prediction: model.raw_output(sample),
    })
}

/// Per-sample attributions for the N most influential features
/// (ranked by mean |shap| over the split), as plot-ready rows.
#[derive(Debug, Clone)]
pub struct ShapSummary {
    /// (feature index, feature name, mean |shap|), most influential first.
    pub top_features: Vec<(usize, String, f64)>,
    /// (sample id, feature name, feature value, usage share, shap value)
    pub rows: Vec<(String, String, f64, f64, f64)>,
}

pub fn shap_summary(
    model: &ForestModel,
    split: &FeatureMatrix,
    top_n: usize,
) -> Result<ShapSummary> {
    if split.n_rows() == 0 {
        return Err(Error::EmptyInput("empty split".into()));
    }
    let reports: Vec<AttributionReport> = crate::par::map_range(split.n_rows(), |i| {
        tree_shap(model, split.row(i)).expect("width checked by caller")
    });

    let width = model.feature_count;
    let mut mean_abs = vec![0.0; width];
    for r in &reports {
        for (acc, v) in mean_abs.iter_mut().zip(&r.shap_values) {
            *acc += v.abs();
        }
    }
    for v in &mut mean_abs {
        *v /= reports.len() as f64;
    }
    let mut order: Vec<usize> = (0..width).collect();
    order.sort_by(|&a, &b| mean_abs[b].total_cmp(&mean_abs[a]).then(a.cmp(&b)));
    order.truncate(top_n);

    let top_features: Vec<(usize, String, f64)> = order
        .iter()
        .map(|&f| (f, split.columns[f].clone(), mean_abs[f]))
        .collect();

    let mut rows = Vec::with_capacity(order.len() * split.n_rows());
    for (i, report) in reports.iter().enumerate() {
        let row = split.row(i);
        let total: f64 = row.iter().sum();
        for &f in &order {
            let share = if total > 0.0 { row[f] / total } else { 0.0 };
            rows.push((
                split.ids[i].clone(),
                split.columns[f].clone(),
                row[f],
                share,
                report.shap_values[f],
            ));
        }
    }
    Ok(ShapSummary {
        top_features,
        rows,
    })
}

impl ShapSummary {
    pub fn write_csv(&self, mut out: impl Write) -> Result<usize> {
        writeln!(out, "sample_id,feature,feature_value,usage_share,shap_value")?;
        for (id, feature, value, share, shap) in &self.rows {
            writeln!(out, "{id},{feature},{value},{share},{shap}")?;
        }
        Ok(self.rows.len())
    }
}
