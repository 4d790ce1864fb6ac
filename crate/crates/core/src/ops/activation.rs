//! Elementwise ReLU and row-wise softmax.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub fn relu(x: &Tensor) -> Tensor {
    x.map(|v| v.max(0.0))
}

/// Gradient passes where the forward input was strictly positive; the
/// subgradient at exactly zero is taken as zero.
pub fn relu_backward(x: &Tensor, dy: &Tensor) -> Result<Tensor> {
    if x.shape() != dy.shape() {
        return Err(Error::Shape(format!(
            "relu_backward shapes differ: {:?} vs {:?}",
            x.shape(),
            dy.shape()
        )));
    }
    let data = x
        .data()
        .iter()
        .zip(dy.data())
        .map(|(&xv, &g)| if xv > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::new(x.shape(), data)
}

/// Row-wise softmax over [N,C] logits, with the row maximum subtracted
/// before exponentiation so large logits cannot overflow.
pub fn softmax(logits: &Tensor) -> Result<Tensor> {
    if logits.rank() != 2 {
        return Err(Error::Shape(format!(
            "softmax input must be [N,C], got {:?}",
            logits.shape()
        )));
    }
    let c = logits.dim(1);
    let mut out = vec![0f32; logits.numel()];
    for (i, row) in logits.data().chunks_exact(c).enumerate() {
        let max = row.iter().copied().fold(f32::NEG_INFINITY, f32::max);
        let dst = &mut out[i * c..(i + 1) * c];
        let mut sum = 0f32;
        for (d, &v) in dst.iter_mut().zip(row) {
            let e = (v - max).exp();
            *d = e;
            sum += e;
        }
        for d in dst.iter_mut() {
            *d /= sum;
        }
    }
    Tensor::new(logits.shape(), out)
}
