//! Data-size scalability: nested stratified subsets per fraction, with
//! per-split CV metrics and mean train/inference wall-clock times.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label};
use crate::error::{Error, Result};
use crate::eval::cv::{run_cv, CvConfig, MetricsRecord};
use crate::models::{Hyperparams, ModelFamily};
use crate::opcode::OpcodeTable;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitSummary {
    pub model: String,
    pub fraction: f64,
    pub subset_size: usize,
    pub mean_accuracy: f64,
    pub mean_f1_phishing: f64,
    pub mean_precision_phishing: f64,
    pub mean_recall_phishing: f64,
    pub mean_train_time_s: f64,
    pub mean_infer_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct ScalabilityReport {
    pub records: Vec<MetricsRecord>,
    pub summaries: Vec<SplitSummary>,
}

/// Subset indices per fraction, nested: the 1/3 subset is a prefix of
/// the 2/3 subset under one per-class shuffle.
pub fn nested_subsets(corpus: &Corpus, fractions: &[f64], seed: u64) -> Result<Vec<Vec<usize>>> {
    for &f in fractions {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::Validation(format!("fraction {f} outside (0, 1]")));
        }
    }
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(), Vec::new()];
    for (i, r) in corpus.records().iter().enumerate() {
        per_class[r.label.index()].push(i);
    }
    for (class, members) in per_class.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(100 + class as u64);
        members.shuffle(&mut rng);
    }
    Ok(fractions
        .iter()
        .map(|&f| {
            let mut subset = Vec::new();
            for members in &per_class {
                let take = ((members.len() as f64) * f).round() as usize;
                subset.extend_from_slice(&members[..take.min(members.len())]);
            }
            subset.sort_unstable();
            subset
        })
        .collect())
}

pub fn run_scalability(
    families: &[(ModelFamily, Hyperparams)],
    corpus: &Corpus,
    table: &OpcodeTable,
    fractions: &[f64],
    k: usize,
    runs: usize,
    seed: u64,
) -> Result<ScalabilityReport> {
    let subsets = nested_subsets(corpus, fractions, seed)?;
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for (subset, &fraction) in subsets.iter().zip(fractions) {
        let sub_records: Vec<_> = subset
            .iter()
            .map(|&i| corpus.records()[i].clone())
            .collect();
        let sub_corpus = Corpus::new(sub_records);
        for class in [Label::Benign, Label::Phishing] {
            if sub_corpus.label_count(class) < k {
                return Err(Error::Validation(format!(
                    "fraction {fraction} leaves class {} with {} samples, fewer than k = {k}",
                    class.name(),
                    sub_corpus.label_count(class)
                )));
            }
        }
        for (family, params) in families {
            let mut cfg = CvConfig::new(k, runs, params.clone());
            cfg.seeds = (0..runs as u64).map(|r| seed + r).collect();
            let fold_records = run_cv(*family, &sub_corpus, table, &cfg)?;
            let n = fold_records.len() as f64;
            let mean = |f: &dyn Fn(&MetricsRecord) -> f64| {
                fold_records.iter().map(|r| f(r)).sum::<f64>() / n
            };
            summaries.push(SplitSummary {
                model: family.name().to_string(),
                fraction,
                subset_size: sub_corpus.len(),
                mean_accuracy: mean(&|r| r.metrics.accuracy),
                mean_f1_phishing: mean(&|r| r.metrics.f1_phishing),
                mean_precision_phishing: mean(&|r| r.metrics.precision_phishing),
                mean_recall_phishing: mean(&|r| r.metrics.recall_phishing),
                mean_train_time_s: mean(&|r| r.train_time_s),
                mean_infer_time_s: mean(&|r| r.infer_time_s),
            });
            records.extend(fold_records.into_iter().map(|mut r| {
                r.model = format!("{}@{:.3}", r.model, fraction);
                r
            }));
        }
    }
    Ok(ScalabilityReport { records, summaries })
}

/// Per-metric block matrix (treatments = models, blocks = splits) for
/// the post hoc critical-difference inputs.
pub fn metric_block_matrix(
    summaries: &[SplitSummary],
    models: &[String],
    metric: impl Fn(&SplitSummary) -> f64,
) -> Vec<Vec<f64>> {
    models
        .iter()
        .map(|m| {
            let mut vals: Vec<(f64, f64)> = summaries
                .iter()
                .filter(|s| &s.model == m)
                .map(|s| (s.fraction, metric(s)))
                .collect();
            vals.sort_by(|a, b| a.0.total_cmp(&b.0));
            vals.into_iter().map(|(_, v)| v).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::cv::tests::toy_corpus;

    #[test]
    fn subsets_are_nested_and_stratified() {
        let corpus = toy_corpus(30); // 60 records
        let subsets = nested_subsets(&corpus, &[1.0 / 3.0, 2.0 / 3.0, 1.0], 7).unwrap();
        assert_eq!(subsets[2].len(), 60);
        assert_eq!(subsets[0].len(), 20);
        assert_eq!(subsets[1].len(), 40);
        for i in &subsets[0] {
            assert!(subsets[1].contains(i), "1/3 not nested in 2/3");
        }
        for i in &subsets[1] {
            assert!(subsets[2].contains(i));
        }
        let phish = subsets[0]
            .iter()
            .filter(|&&i| corpus.records()[i].label == Label::Phishing)
            .count();
        assert_eq!(phish, 10);
    }

    #[test]
    fn full_fraction_equals_plain_cv() {
        let corpus = toy_corpus(15);
        let params = Hyperparams {
            n_trees: 5,
            ..Hyperparams::default()
        };
        let report = run_scalability(
            &[(ModelFamily::RandomForest, params.clone())],
            &corpus,
            OpcodeTable::shanghai(),
            &[1.0],
            3,
            1,
            0,
        )
        .unwrap();
        let mut cfg = CvConfig::new(3, 1, params);
        cfg.seeds = vec![0];
        let direct = run_cv(
            ModelFamily::RandomForest,
            &corpus,
            OpcodeTable::shanghai(),
            &cfg,
        )
        .unwrap();
        for (a, b) in report.records.iter().zip(&direct) {
            assert_eq!(a.metrics, b.metrics);
        }
    }

    #[test]
    fn timing_cells_shape() {
        let corpus = toy_corpus(24);
        let params = Hyperparams {
            n_trees: 3,
            k: 3,
            max_iters: 20,
            ..Hyperparams::default()
        };
        let families = vec![
            (ModelFamily::RandomForest, params.clone()),
            (ModelFamily::Knn, params.clone()),
            (ModelFamily::Logistic, params),
        ];
        let report = run_scalability(
            &families,
            &corpus,
            OpcodeTable::shanghai(),
            &[0.5, 1.0],
            2,
            1,
            1,
        )
        .unwrap();
        // 3 models x 2 splits rows, each with train and infer cells
        assert_eq!(report.summaries.len(), 6);
    }

    #[test]
    fn too_small_fraction_rejected() {
        let corpus = toy_corpus(6);
        let err = run_scalability(
            &[(ModelFamily::Knn, Hyperparams { k: 1, ..Hyperparams::default() })],
            &corpus,
            OpcodeTable::shanghai(),
            &[0.1],
            3,
            1,
            0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }
}
