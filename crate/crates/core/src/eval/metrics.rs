//! Classification metrics in phishing-positive and macro-averaged
//! variants.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub precision_phishing: f64,
    pub recall_phishing: f64,
    pub f1_phishing: f64,
    pub precision_macro: f64,
    pub recall_macro: f64,
    pub f1_macro: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

/// Precision convention: zero predicted positives yields 0, keeping
/// aggregation total. The same convention covers the empty-class
/// recall corner.
fn precision_recall_f1(tp: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, f1)
}

pub fn confusion(predictions: &[Label], labels: &[Label]) -> Result<ConfusionCounts> {
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: predictions.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyInput("no predictions".into()));
    }
    let mut c = ConfusionCounts::default();
    for (p, a) in predictions.iter().zip(labels) {
        match (p, a) {
            (Label::Phishing, Label::Phishing) => c.tp += 1,
            (Label::Phishing, Label::Benign) => c.fp += 1,
            (Label::Benign, Label::Phishing) => c.fn_ += 1,
            (Label::Benign, Label::Benign) => c.tn += 1,
        }
    }
    Ok(c)
}

pub fn compute_metrics(predictions: &[Label], labels: &[Label]) -> Result<ClassificationMetrics> {
    let c = confusion(predictions, labels)?;
    let total = (c.tp + c.fp + c.fn_ + c.tn) as f64;
    let accuracy = (c.tp + c.tn) as f64 / total;
    let (pp, rp, fp1) = precision_recall_f1(c.tp, c.fp, c.fn_);
    // benign treated as the positive class for the macro average
    let (pb, rb, fb1) = precision_recall_f1(c.tn, c.fn_, c.fp);
    Ok(ClassificationMetrics {
        accuracy,
        precision_phishing: pp,
        recall_phishing: rp,
        f1_phishing: fp1,
        precision_macro: (pp + pb) / 2.0,
        recall_macro: (rp + rb) / 2.0,
        f1_macro: (fp1 + fb1) / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(spec: &[(Label, usize)]) -> Vec<Label> {
        spec.iter()
            .flat_map(|&(l, n)| std::iter::repeat_n(l, n))
            .collect()
    }

    #[test]
    fn perfect_two_sample_case() {
        let preds = vec![Label::Phishing, Label::Benign];
        let truth = vec![Label::Phishing, Label::Benign];
        let m = compute_metrics(&preds, &truth).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.precision_phishing, 1.0);
        assert_eq!(m.recall_phishing, 1.0);
        assert_eq!(m.f1_phishing, 1.0);
        assert_eq!(m.f1_macro, 1.0);
    }

    #[test]
    fn all_benign_predictions_on_balanced_data() {
        let preds = labels(&[(Label::Benign, 4)]);
        let truth = labels(&[(Label::Phishing, 2), (Label::Benign, 2)]);
        let m = compute_metrics(&preds, &truth).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(m.recall_phishing, 0.0);
        assert_eq!(m.precision_phishing, 0.0); // zero predicted positives
        assert_eq!(m.f1_phishing, 0.0);
    }

    #[test]
    fn confusion_matrix_arithmetic_oracle() {
        // TP=6, FP=2, FN=4, TN=8
        let mut preds = Vec::new();
        let mut truth = Vec::new();
        for _ in 0..6 {
            preds.push(Label::Phishing);
            truth.push(Label::Phishing);
        }
        for _ in 0..2 {
            preds.push(Label::Phishing);
            truth.push(Label::Benign);
        }
        for _ in 0..4 {
            preds.push(Label::Benign);
            truth.push(Label::Phishing);
        }
        for _ in 0..8 {
            preds.push(Label::Benign);
            truth.push(Label::Benign);
        }
        let m = compute_metrics(&preds, &truth).unwrap();
        assert!((m.precision_phishing - 0.75).abs() < 1e-12);
        assert!((m.recall_phishing - 0.6).abs() < 1e-12);
        assert!((m.f1_phishing - 2.0 / 3.0).abs() < 1e-9);
        assert!((m.accuracy - 0.7).abs() < 1e-12);
        // internal consistency: F1 is the harmonic mean of P and R
        let harm = 2.0 * m.precision_phishing * m.recall_phishing
            / (m.precision_phishing + m.recall_phishing);
        assert!((m.f1_phishing - harm).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(compute_metrics(&[], &[]).is_err());
        assert!(compute_metrics(&[Label::Benign], &[]).is_err());
    }
}
