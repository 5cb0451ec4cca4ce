//! Repeated stratified cross-validation with per-fold feature
//! rebuilding (vocabularies never see test rows).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corpus::{disassemble_corpus, Corpus, Label};
use crate::disasm::Instruction;
use crate::error::{Error, Result};
use crate::eval::folds::make_folds;
use crate::eval::metrics::{compute_metrics, ClassificationMetrics};
use crate::features::{build_histogram_vocab, featurize_streams};
use crate::models::{train_model, Hyperparams, Model, ModelFamily};
use crate::opcode::OpcodeTable;

/// One trial: a (run, fold) evaluation of one model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub model: String,
    pub run: usize,
    pub fold: usize,
    #[serde(flatten)]
    pub metrics: ClassificationMetrics,
    pub train_time_s: f64,
    pub infer_time_s: f64,
    pub train_size: usize,
    pub test_size: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct CvConfig {
    pub k: usize,
    pub runs: usize,
    /// One seed per run; defaults to 0, 1, 2, ...
    pub seeds: Vec<u64>,
    pub params: Hyperparams,
}

impl CvConfig {
    pub fn new(k: usize, runs: usize, params: Hyperparams) -> CvConfig {
        CvConfig {
            k,
            runs,
            seeds: (0..runs as u64).collect(),
            params,
        }
    }

    fn seed_for_run(&self, run: usize) -> u64 {
        self.seeds.get(run).copied().unwrap_or(run as u64)
    }
}

/// Trains on the train split (vocabulary built there alone), evaluates
/// on the test split, and reports metrics and wall-clock times.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_split(
    family: ModelFamily,
    params: &Hyperparams,
    streams: &[Vec<Instruction>],
    ids: &[String],
    labels: &[Label],
    train_idx: &[usize],
    test_idx: &[usize],
    table: &OpcodeTable,
    seed: u64,
) -> Result<(ClassificationMetrics, f64, f64, Model)> {
    let train_streams: Vec<Vec<Instruction>> =
        train_idx.iter().map(|&i| streams[i].clone()).collect();
    let vocab = build_histogram_vocab(&train_streams, table)?;

    let train_ids: Vec<String> = train_idx.iter().map(|&i| ids[i].clone()).collect();
    let train_labels: Vec<Label> = train_idx.iter().map(|&i| labels[i]).collect();
    let train_matrix = featurize_streams(&train_streams, &train_ids, &train_labels, &vocab)?;

    let test_streams: Vec<Vec<Instruction>> =
        test_idx.iter().map(|&i| streams[i].clone()).collect();
    let test_ids: Vec<String> = test_idx.iter().map(|&i| ids[i].clone()).collect();
    let test_labels: Vec<Label> = test_idx.iter().map(|&i| labels[i]).collect();
    let test_matrix = featurize_streams(&test_streams, &test_ids, &test_labels, &vocab)?;

    let t0 = Instant::now();
    let model = train_model(family, &train_matrix, params, seed)?;
    let train_time_s = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let predictions = model.predict(&test_matrix)?;
    let infer_time_s = t1.elapsed().as_secs_f64();

    let pred_labels: Vec<Label> = predictions.iter().map(|p| p.label).collect();
    let metrics = compute_metrics(&pred_labels, &test_labels)?;
    Ok((metrics, train_time_s, infer_time_s, model))
}

/// k x runs records. Folds run sequentially so wall-clock comparisons
/// stay honest; parallelism lives inside model training.
pub fn run_cv(
    family: ModelFamily,
    corpus: &Corpus,
    table: &OpcodeTable,
    config: &CvConfig,
) -> Result<Vec<MetricsRecord>> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("empty corpus".into()));
    }
    let streams = disassemble_corpus(corpus, table);
    let ids: Vec<String> = corpus.records().iter().map(|r| r.address.clone()).collect();
    let labels: Vec<Label> = corpus.records().iter().map(|r| r.label).collect();

    let mut records = Vec::with_capacity(config.k * config.runs);
    for run in 0..config.runs {
        let seed = config.seed_for_run(run);
        let plan = make_folds(&labels, config.k, seed, true)?;
        for fold in 0..config.k {
            let train_idx = plan.train_indices(fold);
            let test_idx = plan.test_indices(fold);
            let (metrics, train_time_s, infer_time_s, _) = evaluate_split(
                family,
                &config.params,
                &streams,
                &ids,
                &labels,
                &train_idx,
                &test_idx,
                table,
                seed,
            )
            .map_err(|e| {
                Error::other(format!(
                    "{} run {run} fold {fold}: {e}",
                    family.name()
                ))
            })?;
            records.push(MetricsRecord {
                model: family.name().to_string(),
                run,
                fold,
                metrics,
                train_time_s,
                infer_time_s,
                train_size: train_idx.len(),
                test_size: test_idx.len(),
                seed,
            });
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ContractRecord;

    /// Tiny two-class corpus: benign contracts lean on PUSH1/MSTORE,
    /// phishing ones on GAS/CALL.
    pub(crate) fn toy_corpus(n_per_class: usize) -> Corpus {
        let mut records = Vec::new();
        for i in 0..n_per_class {
            let reps = 1 + i % 3;
            let benign_code = format!("0x{}", "608060405200".repeat(reps));
            records.push(ContractRecord {
                address: format!("0x{:040x}", i),
                bytecode: crate::disasm::decode_hex(&benign_code).unwrap(),
                label: Label::Benign,
                deployed_month: "2024-01".parse().unwrap(),
                source: "synthetic".into(),
            });
            let phish_code = format!("0x{}", "5a5af1f100".repeat(reps));
            records.push(ContractRecord {
                address: format!("0x{:040x}", 1_000_000 + i),
                bytecode: crate::disasm::decode_hex(&phish_code).unwrap(),
                label: Label::Phishing,
                deployed_month: "2024-02".parse().unwrap(),
                source: "synthetic".into(),
            });
        }
        Corpus::new(records)
    }

    #[test]
    fn record_count_is_k_times_runs() {
        let corpus = toy_corpus(20);
        let cfg = CvConfig::new(
            4,
            3,
            Hyperparams {
                n_trees: 5,
                k: 3,
                ..Hyperparams::default()
            },
        );
        let records = run_cv(
            ModelFamily::RandomForest,
            &corpus,
            OpcodeTable::shanghai(),
            &cfg,
        )
        .unwrap();
        assert_eq!(records.len(), 12);
        assert_eq!(records.iter().map(|r| r.seed).max(), Some(2));
    }

    #[test]
    fn separable_toy_corpus_scores_high() {
        let corpus = toy_corpus(20);
        let cfg = CvConfig::new(
            4,
            1,
            Hyperparams {
                n_trees: 10,
                ..Hyperparams::default()
            },
        );
        let records = run_cv(
            ModelFamily::RandomForest,
            &corpus,
            OpcodeTable::shanghai(),
            &cfg,
        )
        .unwrap();
        let mean: f64 =
            records.iter().map(|r| r.metrics.accuracy).sum::<f64>() / records.len() as f64;
        assert!(mean > 0.95, "mean accuracy {mean}");
    }

    #[test]
    fn identical_config_reproduces_metrics_exactly() {
        let corpus = toy_corpus(12);
        let cfg = CvConfig::new(
            3,
            2,
            Hyperparams {
                n_trees: 7,
                ..Hyperparams::default()
            },
        );
        let a = run_cv(ModelFamily::RandomForest, &corpus, OpcodeTable::shanghai(), &cfg).unwrap();
        let b = run_cv(ModelFamily::RandomForest, &corpus, OpcodeTable::shanghai(), &cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.metrics, y.metrics);
        }
    }
}
