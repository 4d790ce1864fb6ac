//! Averaging class-probability matrices from several models into one.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Elementwise mean of two or more `[N, C]` probability matrices.
///
/// Every member must have the same shape; averaging preserves row sums, so
/// the result is again a row-stochastic matrix.
pub fn ensemble_average(members: &[Tensor]) -> Result<Tensor> {
    if members.len() < 2 {
        return Err(Error::Ensemble(format!(
            "need at least 2 member predictions, got {}",
            members.len()
        )));
    }
    let shape = members[0].shape().to_vec();
    if shape.len() != 2 {
        return Err(Error::Ensemble(format!(
            "member predictions must be rank-2 [samples, classes], got {shape:?}"
        )));
    }
    for (i, m) in members.iter().enumerate() {
        if m.shape() != shape.as_slice() {
            return Err(Error::Ensemble(format!(
                "member {} has shape {:?}, expected {:?}",
                i,
                m.shape(),
                shape
            )));
        }
    }
    let scale = 1.0 / members.len() as f32;
    let mut out = vec![0.0f32; members[0].numel()];
    for m in members {
        for (o, &v) in out.iter_mut().zip(m.data()) {
            *o += v;
        }
    }
    for o in &mut out {
        *o *= scale;
    }
    Tensor::new(&shape, out)
}

/// Argmax of each row of a `[N, C]` probability matrix.
pub fn predicted_labels(probs: &Tensor) -> Result<Vec<usize>> {
    if probs.rank() != 2 {
        return Err(Error::Evaluation(format!(
            "predictions must be rank-2, got {:?}",
            probs.shape()
        )));
    }
    let (n, c) = (probs.dim(0), probs.dim(1));
    let data = probs.data();
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let row = &data[i * c..(i + 1) * c];
        let mut best = 0;
        for (j, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = j;
            }
        }
        labels.push(best);
    }
    Ok(labels)
}
