//! Time-resistance evaluation: train once on an early window, test on
//! each later month, quantify decay with Area Under Time.

use serde::{Deserialize, Serialize};

use crate::corpus::{disassemble_corpus, Corpus, Label, YearMonth};
use crate::error::{Error, Result};
use crate::eval::cv::evaluate_split;
use crate::eval::metrics::ClassificationMetrics;
use crate::models::{Hyperparams, ModelFamily};
use crate::opcode::OpcodeTable;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeWindowPlan {
    pub train_start: YearMonth,
    pub train_end: YearMonth,
    pub test_months: Vec<YearMonth>,
}

impl TimeWindowPlan {
    pub fn validate(&self) -> Result<()> {
        if self.train_start > self.train_end {
            return Err(Error::Validation("train window is inverted".into()));
        }
        let mut prev: Option<YearMonth> = None;
        for &m in &self.test_months {
            if m <= self.train_end {
                return Err(Error::Validation(format!(
                    "test month {m} does not lie strictly after the train window"
                )));
            }
            if let Some(p) = prev {
                if m <= p {
                    return Err(Error::Validation("test months must be increasing".into()));
                }
            }
            prev = Some(m);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimelineRow {
    pub model: String,
    pub month: YearMonth,
    pub test_size: usize,
    /// Absent for months with no test samples (excluded from AUT).
    pub metrics: Option<ClassificationMetrics>,
}

#[derive(Debug, Clone)]
pub struct TimelineReport {
    pub rows: Vec<TimelineRow>,
    /// (model, AUT over the phishing-class F1 series)
    pub aut: Vec<(String, f64)>,
    pub warnings: Vec<String>,
}

/// Normalized trapezoidal area under an ordered series in [0, 1]:
/// (1/(N-1)) * sum of (f_k + f_{k+1})/2.
pub fn aut(f1_series: &[f64]) -> Result<f64> {
    if f1_series.len() < 2 {
        return Err(Error::Validation(format!(
            "AUT needs >= 2 points, got {}",
            f1_series.len()
        )));
    }
    let n = f1_series.len() as f64;
    let area: f64 = f1_series
        .windows(2)
        .map(|w| (w[0] + w[1]) / 2.0)
        .sum();
    Ok(area / (n - 1.0))
}

pub fn run_time_resistance(
    families: &[(ModelFamily, Hyperparams)],
    corpus: &Corpus,
    table: &OpcodeTable,
    plan: &TimeWindowPlan,
    seed: u64,
) -> Result<TimelineReport> {
    plan.validate()?;
    let streams = disassemble_corpus(corpus, table);
    let ids: Vec<String> = corpus.records().iter().map(|r| r.address.clone()).collect();
    let labels: Vec<Label> = corpus.records().iter().map(|r| r.label).collect();

    let train_idx: Vec<usize> = corpus
        .records()
        .iter()
        .enumerate()
        .filter(|(_, r)| {
            r.deployed_month >= plan.train_start && r.deployed_month <= plan.train_end
        })
        .map(|(i, _)| i)
        .collect();
    if train_idx.is_empty() {
        return Err(Error::EmptyInput("no training samples in window".into()));
    }
    let month_indices: Vec<(YearMonth, Vec<usize>)> = plan
        .test_months
        .iter()
        .map(|&m| {
            let idx: Vec<usize> = corpus
                .records()
                .iter()
                .enumerate()
                .filter(|(_, r)| r.deployed_month == m)
                .map(|(i, _)| i)
                .collect();
            (m, idx)
        })
        .collect();

    let mut rows = Vec::new();
    let mut aut_values = Vec::new();
    let mut warnings = Vec::new();
    for (family, params) in families {
        let mut f1_series = Vec::new();
        for (month, test_idx) in &month_indices {
            if test_idx.is_empty() {
                warnings.push(format!(
                    "{}: month {month} has no test samples; excluded from AUT",
                    family.name()
                ));
                rows.push(TimelineRow {
                    model: family.name().to_string(),
                    month: *month,
                    test_size: 0,
                    metrics: None,
                });
                continue;
            }
            let (metrics, _, _, _) = evaluate_split(
                *family,
                params,
                &streams,
                &ids,
                &labels,
                &train_idx,
                test_idx,
                table,
                seed,
            )?;
            f1_series.push(metrics.f1_phishing);
            rows.push(TimelineRow {
                model: family.name().to_string(),
                month: *month,
                test_size: test_idx.len(),
                metrics: Some(metrics),
            });
        }
        aut_values.push((family.name().to_string(), aut(&f1_series)?));
    }
    Ok(TimelineReport {
        rows,
        aut: aut_values,
        warnings,
    })
}
