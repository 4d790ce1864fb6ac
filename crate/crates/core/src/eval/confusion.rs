//! Confusion matrix and the derived per-class and aggregate metrics.

use serde::Serialize;

use crate::error::{Error, Result};

/// Row = true class, column = predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    num_classes: usize,
    counts: Vec<usize>,
}

impl ConfusionMatrix {
    pub fn from_labels(y_true: &[usize], y_pred: &[usize], num_classes: usize) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(Error::Evaluation(format!(
                "{} true labels vs {} predictions",
                y_true.len(),
                y_pred.len()
            )));
        }
        let mut counts = vec![0usize; num_classes * num_classes];
        for (&t, &p) in y_true.iter().zip(y_pred) {
            if t >= num_classes || p >= num_classes {
                return Err(Error::Evaluation(format!(
                    "label pair ({t},{p}) out of range for {num_classes} classes"
                )));
            }
            counts[t * num_classes + p] += 1;
        }
        Ok(Self { num_classes, counts })
    }

    pub fn from_counts(rows: &[Vec<usize>]) -> Result<Self> {
        let num_classes = rows.len();
        if rows.iter().any(|r| r.len() != num_classes) {
            return Err(Error::Evaluation("confusion matrix must be square".into()));
        }
        Ok(Self {
            num_classes,
            counts: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn get(&self, true_class: usize, pred_class: usize) -> usize {
        self.counts[true_class * self.num_classes + pred_class]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn row_sum(&self, class: usize) -> usize {
        (0..self.num_classes).map(|p| self.get(class, p)).sum()
    }

    pub fn col_sum(&self, class: usize) -> usize {
        (0..self.num_classes).map(|t| self.get(t, class)).sum()
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        (0..self.num_classes)
            .map(|t| (0..self.num_classes).map(|p| self.get(t, p)).collect())
            .collect()
    }

    /// One-vs-rest counts (TP, FP, TN, FN) for a class.
    pub fn ovr_counts(&self, class: usize) -> (usize, usize, usize, usize) {
        let tp = self.get(class, class);
        let fp = self.col_sum(class) - tp;
        let fn_ = self.row_sum(class) - tp;
        let tn = self.total() - tp - fp - fn_;
        (tp, fp, tn, fn_)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    /// Set when any denominator was zero and the metric defaulted to 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsSummary {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
}

fn ratio(num: usize, den: usize, degenerate: &mut bool) -> f64 {
    if den == 0 {
        *degenerate = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class one-vs-rest precision/recall/F1 plus overall accuracy and
/// unweighted macro averages. Zero denominators yield 0 with the class's
/// degenerate flag set instead of NaN.
pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricsSummary> {
    let n = cm.total();
    if n == 0 {
        return Err(Error::Evaluation("confusion matrix is empty".into()));
    }
    let mut per_class = Vec::with_capacity(cm.num_classes());
    for class in 0..cm.num_classes() {
        let (tp, fp, _, fn_) = cm.ovr_counts(class);
        let mut degenerate = false;
        let precision = ratio(tp, tp + fp, &mut degenerate);
        let recall = ratio(tp, tp + fn_, &mut degenerate);
        let f1 = if precision + recall == 0.0 {
            degenerate = true;
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassMetrics {
            precision,
            recall,
            f1,
            support: cm.row_sum(class),
            degenerate,
        });
    }
    let trace: usize = (0..cm.num_classes()).map(|c| cm.get(c, c)).sum();
    let k = per_class.len() as f64;
    Ok(MetricsSummary {
        accuracy: trace as f64 / n as f64,
        macro_precision: per_class.iter().map(|m| m.precision).sum::<f64>() / k,
        macro_recall: per_class.iter().map(|m| m.recall).sum::<f64>() / k,
        macro_f1: per_class.iter().map(|m| m.f1).sum::<f64>() / k,
        per_class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions_give_a_diagonal_matrix() {
        let y = [0, 1, 2, 3, 2, 1];
        let cm = ConfusionMatrix::from_labels(&y, &y, 4).unwrap();
        for t in 0..4 {
            for p in 0..4 {
                if t != p {
                    assert_eq!(cm.get(t, p), 0);
                }
            }
        }
        let m = metrics(&cm).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert!(m.per_class.iter().all(|c| c.precision == 1.0 && c.recall == 1.0 && c.f1 == 1.0));
    }

    #[test]
    fn all_predicted_class_zero_fills_one_column() {
        let y_true = [0, 1, 2, 3];
        let y_pred = [0, 0, 0, 0];
        let cm = ConfusionMatrix::from_labels(&y_true, &y_pred, 4).unwrap();
        for t in 0..4 {
            assert_eq!(cm.get(t, 0), 1);
            for p in 1..4 {
                assert_eq!(cm.get(t, p), 0);
            }
        }
    }

    #[test]
    fn twelve_of_thirteen_recall() {
        // 13 true samples of class 1, 12 predicted right, 1 missed into class 2
        let mut y_true = vec![1usize; 13];
        let mut y_pred = vec![1usize; 12];
        y_pred.push(2);
        y_true.extend_from_slice(&[0, 2, 3]);
        y_pred.extend_from_slice(&[0, 2, 3]);
        let cm = ConfusionMatrix::from_labels(&y_true, &y_pred, 4).unwrap();
        let m = metrics(&cm).unwrap();
        assert!((m.per_class[1].recall - 12.0 / 13.0).abs() < 1e-12);
        assert!((m.per_class[1].recall - 0.923).abs() < 1e-3);
    }

    #[test]
    fn row_and_column_identities() {
        let cm = ConfusionMatrix::from_counts(&[
            vec![5, 2, 0, 1],
            vec![1, 7, 1, 0],
            vec![0, 3, 9, 2],
            vec![2, 0, 1, 6],
        ])
        .unwrap();
        for class in 0..4 {
            let (tp, fp, tn, fn_) = cm.ovr_counts(class);
            assert_eq!(tp + fn_, cm.row_sum(class));
            assert_eq!(tp + fp, cm.col_sum(class));
            assert_eq!(tp + fp + tn + fn_, cm.total());
        }
    }

    #[test]
    fn absent_class_is_degenerate_not_nan() {
        // class 3 never occurs and is never predicted
        let y_true = [0, 1, 2, 0];
        let y_pred = [0, 1, 2, 1];
        let cm = ConfusionMatrix::from_labels(&y_true, &y_pred, 4).unwrap();
        let m = metrics(&cm).unwrap();
        let c3 = m.per_class[3];
        assert!(c3.degenerate);
        assert_eq!(c3.precision, 0.0);
        assert_eq!(c3.recall, 0.0);
        assert_eq!(c3.f1, 0.0);
        assert!(m.macro_f1.is_finite());
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(ConfusionMatrix::from_labels(&[0, 1], &[0], 2).is_err());
        let empty = ConfusionMatrix::from_labels(&[], &[], 4).unwrap();
        assert!(metrics(&empty).is_err());
    }
}
