//! From-scratch classifier family over histogram features: random
//! forest, gradient-boosted trees, kNN, logistic regression and a
//! linear SVM, plus grid search and TreeSHAP attribution.

pub mod forest;
pub mod gbdt;
pub mod grid;
pub mod knn;
pub mod linear;
pub mod shap;
pub mod tree;

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

pub use forest::{train_random_forest, EnsembleMode, ForestConfig, ForestModel};
pub use gbdt::{train_gbdt, GbdtConfig};
pub use grid::{default_grid, grid_search, GridRow};
pub use knn::{knn_predict, knn_proba, KnnModel};
pub use linear::{train_linear, LinearConfig, LinearModel, LossKind};
pub use shap::{shap_summary, tree_shap, AttributionReport, ShapSummary};

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    RandomForest,
    Gbdt,
    Knn,
    Logistic,
    Svm,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 5] = [
        ModelFamily::RandomForest,
        ModelFamily::Gbdt,
        ModelFamily::Knn,
        ModelFamily::Logistic,
        ModelFamily::Svm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::RandomForest => "rf",
            ModelFamily::Gbdt => "gbdt",
            ModelFamily::Knn => "knn",
            ModelFamily::Logistic => "logreg",
            ModelFamily::Svm => "svm",
        }
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<ModelFamily> {
        match s {
            "rf" | "random_forest" => Ok(ModelFamily::RandomForest),
            "gbdt" | "xgboost" | "boosting" => Ok(ModelFamily::Gbdt),
            "knn" => Ok(ModelFamily::Knn),
            "logreg" | "logistic" => Ok(ModelFamily::Logistic),
            "svm" => Ok(ModelFamily::Svm),
            other => Err(Error::Validation(format!(
                "unknown model family {other:?} (expected rf|gbdt|knn|logreg|svm)"
            ))),
        }
    }
}

/// One bag of knobs across families; each family reads its own axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Trees for bagging, rounds for boosting.
    pub n_trees: usize,
    /// `None`: unlimited for the forest, the boosting default (6) for
    /// GBDT (grid entries treat it as a high cap there).
    pub max_depth: Option<usize>,
    pub learning_rate: f64,
    pub reg_lambda: f64,
    pub k: usize,
    pub l2: f64,
    pub max_iters: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            n_trees: 300,
            max_depth: None,
            learning_rate: 0.3,
            reg_lambda: 1.0,
            k: 9,
            l2: 1e-2,
            max_iters: 300,
        }
    }
}

/// A trained classifier of any family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Model {
    Forest(ForestModel),
    Linear(LinearModel),
    Knn { train: SerializableMatrix, k: usize },
}

/// Feature matrix in a serialization-friendly shape (kNN keeps its
/// training data as the model).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SerializableMatrix {
    pub columns: Vec<String>,
    pub ids: Vec<String>,
    pub labels: Vec<Label>,
    pub data: Vec<f64>,
}

impl From<&FeatureMatrix> for SerializableMatrix {
    fn from(m: &FeatureMatrix) -> Self {
        let mut data = Vec::with_capacity(m.n_rows() * m.width());
        for i in 0..m.n_rows() {
            data.extend_from_slice(m.row(i));
        }
        SerializableMatrix {
            columns: m.columns.clone(),
            ids: m.ids.clone(),
            labels: m.labels.clone(),
            data,
        }
    }
}

impl SerializableMatrix {
    pub fn to_matrix(&self) -> FeatureMatrix {
        let mut m = FeatureMatrix::new(self.columns.clone());
        let width = self.columns.len();
        for (i, label) in self.labels.iter().enumerate() {
            m.push_row(
                self.ids[i].clone(),
                *label,
                &self.data[i * width..(i + 1) * width],
            )
            .expect("stored matrix is rectangular");
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct Prediction {
    pub probability: f64,
    pub label: Label,
}

impl Prediction {
    /// Hard label at the 0.5 threshold; exact ties go benign.
    fn from_probability(probability: f64) -> Prediction {
        Prediction {
            probability,
            label: if probability > 0.5 {
                Label::Phishing
            } else {
                Label::Benign
            },
        }
    }
}

impl Model {
    pub fn family(&self) -> ModelFamily {
        match self {
            Model::Forest(f) => match f.mode {
                EnsembleMode::Bagging => ModelFamily::RandomForest,
                EnsembleMode::Boosting => ModelFamily::Gbdt,
            },
            Model::Linear(l) => match l.loss {
                LossKind::Logistic => ModelFamily::Logistic,
                LossKind::Hinge => ModelFamily::Svm,
            },
            Model::Knn { .. } => ModelFamily::Knn,
        }
    }

    pub fn feature_count(&self) -> usize {
        match self {
            Model::Forest(f) => f.feature_count,
            Model::Linear(l) => l.weights.len(),
            Model::Knn { train, .. } => train.columns.len(),
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<Prediction> {
        if row.len() != self.feature_count() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count(),
                got: row.len(),
            });
        }
        let probability = match self {
            Model::Forest(f) => f.predict_proba(row),
            Model::Linear(l) => l.predict_proba(row),
            Model::Knn { train, k } => {
                let matrix = train.to_matrix();
                knn_proba(&matrix, row, *k)?
            }
        };
        Ok(Prediction::from_probability(probability))
    }

    /// Per-sample phishing probability and hard label for a matrix.
    pub fn predict(&self, features: &FeatureMatrix) -> Result<Vec<Prediction>> {
        if features.width() != self.feature_count() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count(),
                got: features.width(),
            });
        }
        // kNN re-materializes its matrix once, not per row
        if let Model::Knn { train, k } = self {
            let matrix = train.to_matrix();
            let probs = crate::par::map_range(features.n_rows(), |i| {
                knn_proba(&matrix, features.row(i), *k)
            });
            return probs
                .into_iter()
                .map(|p| p.map(Prediction::from_probability))
                .collect();
        }
        Ok(crate::par::map_range(features.n_rows(), |i| {
            let p = match self {
                Model::Forest(f) => f.predict_proba(features.row(i)),
                Model::Linear(l) => l.predict_proba(features.row(i)),
                Model::Knn { .. } => unreachable!(),
            };
            Prediction::from_probability(p)
        }))
    }
}

/// Trains the selected family with one shared seed (tree streams are
/// derived per tree; GBDT and the linear models are deterministic).
pub fn train_model(
    family: ModelFamily,
    matrix: &FeatureMatrix,
    params: &Hyperparams,
    seed: u64,
) -> Result<Model> {
    match family {
        ModelFamily::RandomForest => {
            let cfg = ForestConfig {
                n_trees: params.n_trees,
                max_depth: params.max_depth,
                min_leaf: 1,
                bootstrap: true,
                seed,
            };
            Ok(Model::Forest(train_random_forest(matrix, &cfg)?))
        }
        ModelFamily::Gbdt => {
            let cfg = GbdtConfig {
                n_rounds: params.n_trees,
                max_depth: params.max_depth.unwrap_or(6).min(32),
                learning_rate: params.learning_rate,
                reg_lambda: params.reg_lambda,
                min_leaf: 1,
            };
            Ok(Model::Forest(train_gbdt(matrix, &cfg)?))
        }
        ModelFamily::Knn => {
            if matrix.n_rows() == 0 {
                return Err(Error::EmptyInput("empty training set".into()));
            }
            if params.k == 0 || params.k > matrix.n_rows() {
                return Err(Error::Validation(format!(
                    "k = {} out of range for {} samples",
                    params.k,
                    matrix.n_rows()
                )));
            }
            Ok(Model::Knn {
                train: SerializableMatrix::from(matrix),
                k: params.k,
            })
        }
        ModelFamily::Logistic | ModelFamily::Svm => {
            let cfg = LinearConfig {
                loss: if family == ModelFamily::Logistic {
                    LossKind::Logistic
                } else {
                    LossKind::Hinge
                },
                l2: params.l2,
                max_iters: params.max_iters,
                tol: 1e-6,
            };
            Ok(Model::Linear(train_linear(matrix, &cfg)?))
        }
    }
}

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct VersionedModel {
    format_version: u32,
    model: Model,
}

/// Versioned JSON serialization (round-trips f64 exactly).
pub fn save_model_json(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let wrapped = VersionedModel {
        format_version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    };
    let file = std::fs::File::create(path)?;
    serde_json::to_writer(std::io::BufWriter::new(file), &wrapped)
        .map_err(|e| Error::other(e.to_string()))
}

pub fn load_model_json(path: impl AsRef<Path>) -> Result<Model> {
    let file = std::fs::File::open(path)?;
    let wrapped: VersionedModel = serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| Error::other(e.to_string()))?;
    if wrapped.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::Validation(format!(
            "unsupported model format version {}",
            wrapped.format_version
        )));
    }
    Ok(wrapped.model)
}

/// Compact binary serialization (bit-exact round trip).
pub fn save_model_binary(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let wrapped = VersionedModel {
        format_version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    };
    let bytes = bincode::serialize(&wrapped).map_err(|e| Error::other(e.to_string()))?;
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn load_model_binary(path: impl AsRef<Path>) -> Result<Model> {
    let bytes = std::fs::read(path)?;
    let wrapped: VersionedModel =
        bincode::deserialize(&bytes).map_err(|e| Error::other(e.to_string()))?;
    if wrapped.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::Validation(format!(
            "unsupported model format version {}",
            wrapped.format_version
        )));
    }
    Ok(wrapped.model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_matrix() -> FeatureMatrix {
        let mut m = FeatureMatrix::new(vec!["a".into(), "b".into()]);
        for i in 0..10 {
            let x = i as f64;
            let label = if i < 5 { Label::Benign } else { Label::Phishing };
            m.push_row(format!("s{i}"), label, &[x, 10.0 - x]).unwrap();
        }
        m
    }

    #[test]
    fn all_families_train_and_predict() {
        let m = toy_matrix();
        let params = Hyperparams {
            n_trees: 10,
            k: 3,
            ..Hyperparams::default()
        };
        for family in ModelFamily::ALL {
            let model = train_model(family, &m, &params, 0).unwrap();
            assert_eq!(model.family(), family);
            let preds = model.predict(&m).unwrap();
            assert_eq!(preds.len(), 10);
            for p in preds {
                assert!((0.0..=1.0).contains(&p.probability));
            }
        }
    }

    #[test]
    fn probability_exactly_half_labels_benign() {
        let p = Prediction::from_probability(0.5);
        assert_eq!(p.label, Label::Benign);
        assert_eq!(Prediction::from_probability(0.5 + 1e-9).label, Label::Phishing);
    }

    #[test]
    fn raising_threshold_never_increases_positive_count() {
        let m = toy_matrix();
        let model = train_model(
            ModelFamily::Gbdt,
            &m,
            &Hyperparams {
                n_trees: 20,
                ..Hyperparams::default()
            },
            0,
        )
        .unwrap();
        let probs: Vec<f64> = model
            .predict(&m)
            .unwrap()
            .into_iter()
            .map(|p| p.probability)
            .collect();
        let mut last_count = usize::MAX;
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let count = probs.iter().filter(|&&p| p > t).count();
            assert!(count <= last_count);
            last_count = count;
        }
    }

    #[test]
    fn json_and_binary_round_trips_are_exact() {
        let m = toy_matrix();
        let dir = tempfile::tempdir().unwrap();
        for family in ModelFamily::ALL {
            let params = Hyperparams {
                n_trees: 5,
                k: 3,
                max_iters: 50,
                ..Hyperparams::default()
            };
            let model = train_model(family, &m, &params, 1).unwrap();
            let jp = dir.path().join(format!("{}.json", family.name()));
            let bp = dir.path().join(format!("{}.bin", family.name()));
            save_model_json(&model, &jp).unwrap();
            save_model_binary(&model, &bp).unwrap();
            let mj = load_model_json(&jp).unwrap();
            let mb = load_model_binary(&bp).unwrap();
            for i in 0..m.n_rows() {
                let want = model.predict_row(m.row(i)).unwrap().probability;
                assert_eq!(want, mj.predict_row(m.row(i)).unwrap().probability);
                assert_eq!(want, mb.predict_row(m.row(i)).unwrap().probability);
            }
        }
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let m = toy_matrix();
        let model = train_model(ModelFamily::Knn, &m, &Hyperparams { k: 1, ..Hyperparams::default() }, 0).unwrap();
        assert!(model.predict_row(&[1.0]).is_err());
    }
}
