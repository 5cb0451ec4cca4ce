//! Experiment harnesses: cross-validation, scalability and
//! time-resistance runs over a corpus, with CSV emission. Metric CSVs
//! exclude wall-clock columns so repeated runs are byte-identical;
//! timings go to their own file.

pub mod cv;
pub mod folds;
pub mod metrics;
pub mod scalability;
pub mod timeline;

use std::io::Write;

use crate::error::Result;

pub use cv::{evaluate_split, run_cv, CvConfig, MetricsRecord};
pub use folds::{make_folds, FoldPlan};
pub use metrics::{compute_metrics, ClassificationMetrics};
pub use scalability::{
    metric_block_matrix, nested_subsets, run_scalability, ScalabilityReport, SplitSummary,
};
pub use timeline::{aut, run_time_resistance, TimeWindowPlan, TimelineReport, TimelineRow};

/// Deterministic metrics CSV (no timing columns).
pub fn write_metrics_csv(records: &[MetricsRecord], mut out: impl Write) -> Result<usize> {
    writeln!(
        out,
        "model,run,fold,seed,train_size,test_size,accuracy,precision_phishing,recall_phishing,f1_phishing,precision_macro,recall_macro,f1_macro"
    )?;
    for r in records {
        let m = &r.metrics;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.model,
            r.run,
            r.fold,
            r.seed,
            r.train_size,
            r.test_size,
            m.accuracy,
            m.precision_phishing,
            m.recall_phishing,
            m.f1_phishing,
            m.precision_macro,
            m.recall_macro,
            m.f1_macro
        )?;
    }
    Ok(records.len())
}

/// Wall-clock table, kept separate from the deterministic metrics.
pub fn write_timings_csv(records: &[MetricsRecord], mut out: impl Write) -> Result<usize> {
    writeln!(out, "model,run,fold,train_size,train_time_s,infer_time_s")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.model, r.run, r.fold, r.train_size, r.train_time_s, r.infer_time_s
        )?;
    }
    Ok(records.len())
}

/// Reads the metrics CSV back into per-model metric groups, as the
/// post hoc stage consumes them: (model names, per-model values) for
/// the requested metric column.
pub fn read_metric_groups(
    csv_text: &str,
    metric: &str,
) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    use crate::error::Error;
    let mut lines = csv_text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::EmptyInput("empty metrics csv".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let metric_col = cols
        .iter()
        .position(|c| *c == metric)
        .ok_or_else(|| Error::Validation(format!("metric column {metric:?} not found")))?;
    let mut names: Vec<String> = Vec::new();
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::Parse {
                line: i + 2,
                msg: format!("expected {} fields, got {}", cols.len(), fields.len()),
            });
        }
        let model = fields[0].to_string();
        let value: f64 = fields[metric_col].parse().map_err(|e| Error::Parse {
            line: i + 2,
            msg: format!("bad {metric} value: {e}"),
        })?;
        match names.iter().position(|n| *n == model) {
            Some(g) => groups[g].push(value),
            None => {
                names.push(model);
                groups.push(vec![value]);
            }
        }
    }
    Ok((names, groups))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;

    fn record(model: &str, acc: f64) -> MetricsRecord {
        let m = compute_metrics(
            &[Label::Phishing, Label::Benign],
            &[Label::Phishing, Label::Benign],
        )
        .unwrap();
        MetricsRecord {
            model: model.into(),
            run: 0,
            fold: 0,
            metrics: ClassificationMetrics { accuracy: acc, ..m },
            train_time_s: 1.0,
            infer_time_s: 0.5,
            train_size: 10,
            test_size: 2,
            seed: 0,
        }
    }

    #[test]
    fn metrics_csv_round_trip_to_groups() {
        let records = vec![record("rf", 0.9), record("rf", 0.92), record("knn", 0.8)];
        let mut buf = Vec::new();
        write_metrics_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let (names, groups) = read_metric_groups(&text, "accuracy").unwrap();
        assert_eq!(names, vec!["rf".to_string(), "knn".to_string()]);
        assert_eq!(groups[0], vec![0.9, 0.92]);
        assert_eq!(groups[1], vec![0.8]);
    }

    #[test]
    fn metrics_csv_has_no_timing_columns() {
        let mut buf = Vec::new();
        write_metrics_csv(&[record("rf", 1.0)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains("time"));
    }

    #[test]
    fn unknown_metric_column_rejected() {
        let mut buf = Vec::new();
        write_metrics_csv(&[record("rf", 1.0)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(read_metric_groups(&text, "latency").is_err());
    }
}
