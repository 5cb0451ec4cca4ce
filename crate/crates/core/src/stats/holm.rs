//! Holm-Bonferroni step-down multiplicity correction.

use crate::error::{Error, Result};

/// Adjusted p-values, returned in the input order.
///
/// Step-down rule on ascending p: p_adj(i) = max over j <= i of
/// min(1, (m - j + 1) * p(j)).
pub fn holm_bonferroni(p_values: &[f64]) -> Result<Vec<f64>> {
    let m = p_values.len();
    if p_values.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::Validation("p-value outside [0, 1]".into()));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].partial_cmp(&p_values[b]).unwrap());

    let mut adjusted = vec![0.0; m];
    let mut running_max = 0.0f64;
    for (pos, &idx) in order.iter().enumerate() {
        let scaled = ((m - pos) as f64 * p_values[idx]).min(1.0);
        running_max = running_max.max(scaled);
        adjusted[idx] = running_max;
    }
    Ok(adjusted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_values() {
        let adj = holm_bonferroni(&[0.01, 0.04]).unwrap();
        assert_eq!(adj, vec![0.02, 0.04]);
    }

    #[test]
    fn single_value_unchanged() {
        assert_eq!(holm_bonferroni(&[0.3]).unwrap(), vec![0.3]);
    }

    #[test]
    fn all_ones_stay_ones() {
        assert_eq!(holm_bonferroni(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0; 3]);
    }

    #[test]
    fn order_restored() {
        let p = [0.04, 0.01, 0.3];
        let adj = holm_bonferroni(&p).unwrap();
        // sorted: 0.01*3=0.03, then max(0.03, 0.04*2)=0.08, then max(.., 0.3)
        assert!((adj[1] - 0.03).abs() < 1e-15);
        assert!((adj[0] - 0.08).abs() < 1e-15);
        assert!((adj[2] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn sandwiched_between_raw_and_bonferroni() {
        let p = [0.002, 0.02, 0.07, 0.3, 0.9];
        let m = p.len() as f64;
        let adj = holm_bonferroni(&p).unwrap();
        for (i, (&raw, &a)) in p.iter().zip(&adj).enumerate() {
            assert!(a >= raw, "index {i}");
            assert!(a <= (m * raw).min(1.0) + 1e-15, "index {i}");
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(holm_bonferroni(&[0.5, 1.5]).is_err());
        assert!(holm_bonferroni(&[-0.1]).is_err());
    }
}
