//! L2-regularized linear models trained by full-batch gradient descent
//! with a halving line search: logistic regression and a linear SVM
//! (hinge loss).

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::FeatureMatrix;
use crate::models::forest::check_trainable;
use crate::models::sigmoid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Logistic,
    Hinge,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub loss: LossKind,
    pub l2: f64,
}

impl LinearModel {
    pub fn margin(&self, row: &[f64]) -> f64 {
        self.bias
            + self
                .weights
                .iter()
                .zip(row)
                .map(|(w, x)| w * x)
                .sum::<f64>()
    }

    /// Phishing probability through the logistic link (for the hinge
    /// model this is a monotone score mapping, not a calibrated
    /// probability).
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.margin(row))
    }
}

#[derive(Debug, Clone)]
pub struct LinearConfig {
    pub loss: LossKind,
    pub l2: f64,
    pub max_iters: usize,
    /// Stop when the gradient norm falls below this.
    pub tol: f64,
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig {
            loss: LossKind::Logistic,
            l2: 1e-2,
            max_iters: 300,
            tol: 1e-6,
        }
    }
}

/// Objective: mean loss over samples + (l2/2)||w||^2 (bias excluded).
/// Labels enter as y = +1 (phishing) / -1 (benign).
fn objective(matrix: &FeatureMatrix, w: &[f64], b: f64, cfg: &LinearConfig) -> f64 {
    let n = matrix.n_rows();
    let data_term = crate::par::sum_range(n, |i| {
        let y = if matrix.label(i).index() == 1 { 1.0 } else { -1.0 };
        let m = y * (b + dot(w, matrix.row(i)));
        match cfg.loss {
            // ln(1 + exp(-m)), stable for both signs
            LossKind::Logistic => {
                if m > 0.0 {
                    (-m).exp().ln_1p()
                } else {
                    -m + m.exp().ln_1p()
                }
            }
            LossKind::Hinge => (1.0 - m).max(0.0),
        }
    }) / n as f64;
    data_term + 0.5 * cfg.l2 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Gradient of the objective; for hinge this is the standard
/// subgradient (violators only).
fn gradient(matrix: &FeatureMatrix, w: &[f64], b: f64, cfg: &LinearConfig) -> (Vec<f64>, f64) {
    let n = matrix.n_rows();
    let width = matrix.width();
    // last slot accumulates the bias derivative
    let acc = crate::par::sum_vectors(n, width + 1, |i, acc| {
        let y = if matrix.label(i).index() == 1 { 1.0 } else { -1.0 };
        let row = matrix.row(i);
        let m = y * (b + dot(w, row));
        let coeff = match cfg.loss {
            LossKind::Logistic => -y * sigmoid(-m),
            LossKind::Hinge => {
                if m < 1.0 {
                    -y
                } else {
                    0.0
                }
            }
        };
        if coeff != 0.0 {
            for (a, x) in acc[..width].iter_mut().zip(row) {
                *a += coeff * x;
            }
            acc[width] += coeff;
        }
    });
    let mut grad_w: Vec<f64> = acc[..width]
        .iter()
        .zip(w)
        .map(|(g, wi)| g / n as f64 + cfg.l2 * wi)
        .collect();
    let grad_b = acc[width] / n as f64;
    // guard against -0.0 artifacts for exact reproducibility
    for g in &mut grad_w {
        if *g == 0.0 {
            *g = 0.0;
        }
    }
    (grad_w, grad_b)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Full-batch descent: from zero weights, step along the negative
/// gradient with a halving line search that only accepts
/// non-increasing objective values, until the gradient norm drops
/// below `tol` or the iteration budget runs out.
pub fn train_linear(matrix: &FeatureMatrix, config: &LinearConfig) -> Result<LinearModel> {
    check_trainable(matrix)?;
    let width = matrix.width();
    let mut w = vec![0.0; width];
    let mut b = 0.0;
    let mut loss = objective(matrix, &w, b, config);
    // initial scale guess from the data magnitude keeps the first
    // line searches short on raw count features
    let mean_sq = crate::par::sum_range(matrix.n_rows(), |i| {
        matrix.row(i).iter().map(|v| v * v).sum::<f64>()
    }) / matrix.n_rows() as f64;
    let mut step = 1.0 / (1.0 + mean_sq);

    for _ in 0..config.max_iters {
        let (gw, gb) = gradient(matrix, &w, b, config);
        let gnorm2: f64 = gw.iter().map(|g| g * g).sum::<f64>() + gb * gb;
        if gnorm2.sqrt() < config.tol {
            break;
        }
        step *= 2.0; // allow recovery after conservative halvings
        let mut accepted = false;
        while step > 1e-18 {
            let wt: Vec<f64> = w.iter().zip(&gw).map(|(wi, g)| wi - step * g).collect();
            let bt = b - step * gb;
            let lt = objective(matrix, &wt, bt, config);
            if lt <= loss {
                w = wt;
                b = bt;
                loss = lt;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break; // no descent direction progress at machine scale
        }
    }

    Ok(LinearModel {
        weights: w,
        bias: b,
        loss: config.loss,
        l2: config.l2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;

    fn symmetric_1d() -> FeatureMatrix {
        let mut m = FeatureMatrix::new(vec!["x".into()]);
        m.push_row("a".into(), Label::Benign, &[-1.0]).unwrap();
        m.push_row("b".into(), Label::Phishing, &[1.0]).unwrap();
        m
    }

    #[test]
    fn symmetric_data_positive_weight_boundary_near_zero() {
        for loss in [LossKind::Logistic, LossKind::Hinge] {
            let cfg = LinearConfig {
                loss,
                l2: 1e-4,
                max_iters: 500,
                ..LinearConfig::default()
            };
            let model = train_linear(&symmetric_1d(), &cfg).unwrap();
            assert!(model.weights[0] > 0.0, "{loss:?}");
            assert!(model.bias.abs() < 0.2, "{loss:?}: bias {}", model.bias);
            assert!(model.predict_proba(&[1.0]) > 0.5);
            assert!(model.predict_proba(&[-1.0]) < 0.5);
        }
    }

    #[test]
    fn zero_iterations_predicts_from_zero_init() {
        let cfg = LinearConfig {
            max_iters: 0,
            ..LinearConfig::default()
        };
        let model = train_linear(&symmetric_1d(), &cfg).unwrap();
        assert_eq!(model.weights, vec![0.0]);
        assert_eq!(model.predict_proba(&[42.0]), 0.5);
    }

    #[test]
    fn logistic_gradient_matches_central_finite_differences() {
        // small random-ish instance, fixed numbers
        let mut m = FeatureMatrix::new(vec!["a".into(), "b".into(), "c".into()]);
        let rows: [( [f64; 3], Label); 6] = [
            ([0.3, -1.2, 0.8], Label::Benign),
            ([1.1, 0.4, -0.6], Label::Phishing),
            ([-0.7, 0.9, 0.2], Label::Benign),
            ([0.5, 0.5, 0.5], Label::Phishing),
            ([-1.4, -0.3, 1.9], Label::Phishing),
            ([0.0, 2.2, -1.1], Label::Benign),
        ];
        for (i, (row, label)) in rows.iter().enumerate() {
            m.push_row(format!("s{i}"), *label, row).unwrap();
        }
        let cfg = LinearConfig {
            l2: 0.05,
            ..LinearConfig::default()
        };
        let w = [0.21, -0.4, 0.13];
        let b = 0.07;
        let (gw, gb) = gradient(&m, &w, b, &cfg);
        let eps = 1e-6;
        for d in 0..3 {
            let mut wp = w.to_vec();
            let mut wm = w.to_vec();
            wp[d] += eps;
            wm[d] -= eps;
            let fd =
                (objective(&m, &wp, b, &cfg) - objective(&m, &wm, b, &cfg)) / (2.0 * eps);
            assert!((gw[d] - fd).abs() < 1e-6, "dim {d}: {} vs {}", gw[d], fd);
        }
        let fdb = (objective(&m, &w, b + eps, &cfg) - objective(&m, &w, b - eps, &cfg))
            / (2.0 * eps);
        assert!((gb - fdb).abs() < 1e-6);
    }

    #[test]
    fn loss_never_increases_over_accepted_steps() {
        // instrumented re-run of the descent loop
        let mut m = FeatureMatrix::new(vec!["a".into(), "b".into()]);
        for i in 0..40 {
            let x = (i as f64 * 0.37).sin() * 3.0;
            let y = (i as f64 * 0.91).cos() * 2.0;
            let label = if x + 0.5 * y + 0.3 * (i as f64 * 1.7).sin() > 0.0 {
                Label::Phishing
            } else {
                Label::Benign
            };
            m.push_row(format!("s{i}"), label, &[x, y]).unwrap();
        }
        for loss_kind in [LossKind::Logistic, LossKind::Hinge] {
            let cfg = LinearConfig {
                loss: loss_kind,
                l2: 1e-3,
                max_iters: 120,
                ..LinearConfig::default()
            };
            let mut w = vec![0.0; 2];
            let mut b = 0.0;
            let mut loss = objective(&m, &w, b, &cfg);
            let mut step = 0.05;
            for _ in 0..cfg.max_iters {
                let (gw, gb) = gradient(&m, &w, b, &cfg);
                step *= 2.0;
                while step > 1e-18 {
                    let wt: Vec<f64> =
                        w.iter().zip(&gw).map(|(wi, g)| wi - step * g).collect();
                    let bt = b - step * gb;
                    let lt = objective(&m, &wt, bt, &cfg);
                    if lt <= loss {
                        assert!(lt <= loss, "accepted step increased loss");
                        w = wt;
                        b = bt;
                        loss = lt;
                        break;
                    }
                    step *= 0.5;
                }
            }
        }
    }
}
