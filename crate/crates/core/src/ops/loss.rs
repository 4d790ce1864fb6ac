//! Categorical cross-entropy over softmax probabilities, plus the flatten
//! reshape between the convolutional stack and the dense head.

use crate::error::{Error, Result};
use crate::ops::activation::softmax;
use crate::tensor::Tensor;

/// Floor applied to the predicted probability of the true class before the
/// log, so a fully confident wrong prediction yields a large finite loss.
pub const PROB_FLOOR: f32 = 1e-12;

fn check_labels(n: usize, c: usize, labels: &[usize]) -> Result<()> {
    if labels.len() != n {
        return Err(Error::Label(format!(
            "expected {n} labels, got {}",
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= c) {
        return Err(Error::Label(format!("label {bad} out of range for {c} classes")));
    }
    Ok(())
}

/// Mean negative log-likelihood of the true classes under `probs` [N,C].
pub fn cross_entropy(probs: &Tensor, labels: &[usize]) -> Result<f32> {
    if probs.rank() != 2 {
        return Err(Error::Shape(format!(
            "cross_entropy expects [N,C] probabilities, got {:?}",
            probs.shape()
        )));
    }
    let (n, c) = (probs.dim(0), probs.dim(1));
    check_labels(n, c, labels)?;
    let pd = probs.data();
    let mut acc = 0f64;
    for (i, &l) in labels.iter().enumerate() {
        let p = pd[i * c + l].max(PROB_FLOOR);
        acc -= (p as f64).ln();
    }
    Ok((acc / n as f64) as f32)
}

/// Softmax + cross-entropy in one step: returns (loss, probs, dlogits) where
/// dlogits = (probs - onehot) / N is the exact gradient with respect to the
/// pre-softmax logits.
pub fn softmax_cross_entropy(logits: &Tensor, labels: &[usize]) -> Result<(f32, Tensor, Tensor)> {
    let probs = softmax(logits)?;
    let (n, c) = (probs.dim(0), probs.dim(1));
    check_labels(n, c, labels)?;
    let loss = cross_entropy(&probs, labels)?;
    let mut grad = probs.data().to_vec();
    let inv_n = 1.0 / n as f32;
    for (i, &l) in labels.iter().enumerate() {
        grad[i * c + l] -= 1.0;
    }
    for g in &mut grad {
        *g *= inv_n;
    }
    Ok((loss, probs, Tensor::new(logits.shape(), grad)?))
}

/// [N,H,W,C] -> [N,H*W*C]. Row-major layout makes this a pure reshape.
pub fn flatten(x: &Tensor) -> Result<Tensor> {
    if x.rank() != 4 {
        return Err(Error::Shape(format!("flatten expects [N,H,W,C], got {:?}", x.shape())));
    }
    let n = x.dim(0);
    let width = x.dim(1) * x.dim(2) * x.dim(3);
    x.clone().reshape(&[n, width])
}

pub fn flatten_backward(in_shape: &[usize], dy: &Tensor) -> Result<Tensor> {
    let n = in_shape[0];
    let width: usize = in_shape[1..].iter().product();
    if dy.shape() != [n, width] {
        return Err(Error::Shape(format!(
            "flatten_backward dy must be [{n},{width}], got {:?}",
            dy.shape()
        )));
    }
    dy.clone().reshape(in_shape)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_probabilities_give_ln_c() {
        let probs = Tensor::full(&[2, 4], 0.25);
        let loss = cross_entropy(&probs, &[0, 3]).unwrap();
        assert!((loss - 4.0f32.ln()).abs() < 1e-6);
    }

    #[test]
    fn confident_wrong_prediction_is_finite() {
        let probs = Tensor::new(&[1, 2], vec![1.0, 0.0]).unwrap();
        let loss = cross_entropy(&probs, &[1]).unwrap();
        assert!(loss.is_finite());
        assert!(loss > 20.0);
    }

    #[test]
    fn fused_gradient_is_probs_minus_onehot_over_n() {
        let logits = Tensor::new(&[2, 3], vec![0.0, 1.0, -1.0, 2.0, 0.5, 0.1]).unwrap();
        let (_, probs, grad) = softmax_cross_entropy(&logits, &[1, 0]).unwrap();
        for i in 0..2 {
            for ci in 0..3 {
                let onehot = if (i == 0 && ci == 1) || (i == 1 && ci == 0) { 1.0 } else { 0.0 };
                let want = (probs.data()[i * 3 + ci] - onehot) / 2.0;
                assert!((grad.data()[i * 3 + ci] - want).abs() < 1e-7);
            }
        }
        // gradient over each row sums to zero
        for row in grad.data().chunks_exact(3) {
            assert!(row.iter().sum::<f32>().abs() < 1e-7);
        }
    }

    #[test]
    fn label_out_of_range_is_rejected() {
        let probs = Tensor::full(&[1, 3], 1.0 / 3.0);
        assert!(matches!(cross_entropy(&probs, &[3]), Err(Error::Label(_))));
        assert!(matches!(cross_entropy(&probs, &[0, 1]), Err(Error::Label(_))));
    }

    #[test]
    fn flatten_round_trips() {
        let x = Tensor::new(&[2, 2, 2, 3], (0..24).map(|i| i as f32).collect()).unwrap();
        let f = flatten(&x).unwrap();
        assert_eq!(f.shape(), &[2, 12]);
        assert_eq!(f.data(), x.data());
        let back = flatten_backward(&[2, 2, 2, 3], &f).unwrap();
        assert_eq!(back.shape(), x.shape());
        assert_eq!(back.data(), x.data());
    }
}
