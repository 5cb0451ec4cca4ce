//! Deterministic (optionally stratified) k-fold partitions.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// sample index -> fold index
    pub assignments: Vec<usize>,
    pub stratified: bool,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| f != fold)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Shuffles (per class when stratified) with a seed-derived stream and
/// deals samples round-robin, so per-fold class proportions stay
/// within one sample of the global ones.
pub fn make_folds(labels: &[Label], k: usize, seed: u64, stratified: bool) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Validation(format!("k must be >= 2, got {k}")));
    }
    if labels.len() < k {
        return Err(Error::Validation(format!(
            "{} samples cannot fill {k} folds",
            labels.len()
        )));
    }
    let mut assignments = vec![0usize; labels.len()];
    if stratified {
        for class in [Label::Benign, Label::Phishing] {
            let mut members: Vec<usize> = labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == class)
                .map(|(i, _)| i)
                .collect();
            if members.len() < k {
                return Err(Error::Validation(format!(
                    "class {} has {} members, fewer than k = {k}",
                    class.name(),
                    members.len()
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(class.index() as u64 + 1);
            members.shuffle(&mut rng);
            for (pos, idx) in members.into_iter().enumerate() {
                assignments[idx] = pos % k;
            }
        }
    } else {
        let mut order: Vec<usize> = (0..labels.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        for (pos, idx) in order.into_iter().enumerate() {
            assignments[idx] = pos % k;
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        assignments,
        stratified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_folds() {
        let labels: Vec<Label> = (0..10)
            .map(|i| if i % 2 == 0 { Label::Benign } else { Label::Phishing })
            .collect();
        let plan = make_folds(&labels, 10, 0, false).unwrap();
        for fold in 0..10 {
            assert_eq!(plan.test_indices(fold).len(), 1);
        }
    }

    #[test]
    fn stratified_proportions_within_one_sample() {
        let labels: Vec<Label> = (0..700)
            .map(|i| if i < 362 { Label::Phishing } else { Label::Benign })
            .collect();
        let plan = make_folds(&labels, 10, 3, true).unwrap();
        for fold in 0..10 {
            let test = plan.test_indices(fold);
            let phish = test.iter().filter(|&&i| labels[i] == Label::Phishing).count();
            // 362/10 = 36.2 -> every fold holds 36 or 37
            assert!(phish == 36 || phish == 37, "fold {fold}: {phish}");
        }
    }

    #[test]
    fn folds_partition_the_dataset() {
        let labels: Vec<Label> = (0..97)
            .map(|i| if i % 3 == 0 { Label::Phishing } else { Label::Benign })
            .collect();
        let plan = make_folds(&labels, 7, 11, true).unwrap();
        let mut seen = vec![false; labels.len()];
        for fold in 0..7 {
            for i in plan.test_indices(fold) {
                assert!(!seen[i], "sample {i} in two folds");
                seen[i] = true;
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn deterministic_for_same_inputs() {
        let labels: Vec<Label> = (0..50)
            .map(|i| if i % 2 == 0 { Label::Benign } else { Label::Phishing })
            .collect();
        let a = make_folds(&labels, 5, 9, true).unwrap();
        let b = make_folds(&labels, 5, 9, true).unwrap();
        assert_eq!(a.assignments, b.assignments);
        let c = make_folds(&labels, 5, 10, true).unwrap();
        assert_ne!(a.assignments, c.assignments);
    }

    #[test]
    fn class_smaller_than_k_rejected_when_stratified() {
        let mut labels = vec![Label::Benign; 20];
        labels[0] = Label::Phishing;
        labels[1] = Label::Phishing;
        assert!(make_folds(&labels, 5, 0, true).is_err());
        assert!(make_folds(&labels, 5, 0, false).is_ok());
    }
}
