//! Micro-averaged one-vs-rest ROC curve and area under it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Builds the micro-averaged one-vs-rest ROC curve of an `[N, C]` score
/// matrix: every (sample, class) pair is pooled into one binary problem
/// (positive when the class is the sample's true label) and the curve is
/// traced by sweeping a threshold over the distinct scores. Tied scores are
/// consumed as a single step, and the area comes from the trapezoid rule.
pub fn roc_auc(scores: &Tensor, labels: &[usize]) -> Result<RocCurve> {
    if scores.rank() != 2 {
        return Err(Error::Evaluation(format!(
            "scores must be rank-2, got {:?}",
            scores.shape()
        )));
    }
    let (n, c) = (scores.dim(0), scores.dim(1));
    if labels.len() != n {
        return Err(Error::Evaluation(format!(
            "{} label rows vs {} score rows",
            labels.len(),
            n
        )));
    }
    if n == 0 {
        return Err(Error::Evaluation("no samples to score".into()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= c) {
        return Err(Error::Evaluation(format!(
            "label {bad} out of range for {c} classes"
        )));
    }
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(Error::Evaluation(
            "all samples share one true class; the curve is undefined".into(),
        ));
    }

    let mut pool: Vec<(f64, bool)> = Vec::with_capacity(n * c);
    for (i, &label) in labels.iter().enumerate() {
        for j in 0..c {
            pool.push((scores.data()[i * c + j] as f64, j == label));
        }
    }
    pool.sort_by(|a, b| b.0.total_cmp(&a.0));

    let positives = n as f64;
    let negatives = (n * c - n) as f64;
    let top = pool[0].0;
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: top + 1.0,
    }];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut auc = 0.0;
    let mut i = 0;
    while i < pool.len() {
        let value = pool[i].0;
        while i < pool.len() && pool[i].0 == value {
            if pool[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let prev = *points.last().expect("curve starts at the origin");
        let point = RocPoint {
            fpr: fp as f64 / negatives,
            tpr: tp as f64 / positives,
            threshold: value,
        };
        auc += (point.fpr - prev.fpr) * (point.tpr + prev.tpr) / 2.0;
        points.push(point);
    }
    Ok(RocCurve { points, auc })
}
