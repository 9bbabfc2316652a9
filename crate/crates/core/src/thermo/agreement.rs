use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Agreement between a predicted and a reference stability classifier.
/// A ratio with a zero denominator is reported as 0 and flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementStats {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub f1_undefined: bool,
    pub accuracy_undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("predicted and reference lists differ in length ({0} vs {1})")]
pub struct LengthMismatch(pub usize, pub usize);

/// Positive class: `e_hull <= cutoff`.
pub fn agreement_stats(pred: &[f64], reference: &[f64], cutoff: f64) -> Result<AgreementStats, LengthMismatch> {
    if pred.len() != reference.len() {
        return Err(LengthMismatch(pred.len(), reference.len()));
    }
    let (mut tp, mut fp, mut tn, mut fneg) = (0, 0, 0, 0);
    for (p, r) in pred.iter().zip(reference) {
        match (*p <= cutoff, *r <= cutoff) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fneg += 1,
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { (0.0, true) } else { (num as f64 / den as f64, false) };
    let (precision, precision_undefined) = ratio(tp, tp + fp);
    let (recall, recall_undefined) = ratio(tp, tp + fneg);
    let (accuracy, accuracy_undefined) = ratio(tp + tn, pred.len());
    let (f1, f1_undefined) = if precision + recall == 0.0 {
        (0.0, true)
    } else {
        (2.0 * precision * recall / (precision + recall), false)
    };
    Ok(AgreementStats {
        precision,
        recall,
        f1,
        accuracy,
        true_positives: tp,
        false_positives: fp,
        true_negatives: tn,
        false_negatives: fneg,
        precision_undefined,
        recall_undefined,
        f1_undefined,
        accuracy_undefined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_agreement() {
        let v = [0.0, 0.2, -0.1, 0.05];
        let s = agreement_stats(&v, &v, 0.0).unwrap();
        assert_eq!((s.precision, s.recall, s.f1, s.accuracy), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn everything_predicted_positive() {
        let pred = [-1.0; 10];
        let reference = [-0.1, -0.2, 0.0, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
        let s = agreement_stats(&pred, &reference, 0.0).unwrap();
        assert!((s.precision - 0.3).abs() < 1e-15);
        assert_eq!(s.recall, 1.0);
        assert!((s.f1 - 0.6 / 1.3).abs() < 1e-15);
        assert!((s.f1 - 0.4615).abs() < 1e-4);
        assert!((s.accuracy - 0.3).abs() < 1e-15);
    }

    #[test]
    fn degenerate_cases_are_flagged() {
        let s = agreement_stats(&[0.5, 0.6], &[0.5, 0.7], 0.0).unwrap();
        assert!(s.recall_undefined && s.precision_undefined && s.f1_undefined);
        assert_eq!(s.recall, 0.0);
        assert_eq!(s.accuracy, 1.0);
        assert!(!s.accuracy_undefined);
        assert_eq!(agreement_stats(&[0.0], &[], 0.0), Err(LengthMismatch(1, 0)));
    }
}
