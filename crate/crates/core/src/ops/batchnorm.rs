//! Per-channel batch normalization over [N,H,W,C] activations.
//! Train mode normalizes by biased batch statistics and updates the moving
//! averages; infer mode normalizes by the moving statistics. Epsilon 1e-3,
//! moving-average momentum 0.99.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const BN_EPSILON: f32 = 1e-3;
pub const BN_MOMENTUM: f32 = 0.99;

#[derive(Debug, Clone)]
pub struct BnCache {
    x_hat: Tensor,
    inv_std: Vec<f32>,
    gamma: Tensor,
    /// Elements per channel in the batch (N*H*W).
    m: usize,
}

fn check(x: &Tensor, per_channel: &[&Tensor]) -> Result<usize> {
    if x.rank() != 4 {
        return Err(Error::Shape(format!("batchnorm input must be [N,H,W,C], got {:?}", x.shape())));
    }
    let c = x.dim(3);
    for t in per_channel {
        if t.shape() != [c] {
            return Err(Error::Shape(format!(
                "batchnorm parameter must be [{c}], got {:?}",
                t.shape()
            )));
        }
    }
    Ok(c)
}

/// Train-mode forward. Returns the normalized output, the backward cache,
/// and the updated moving mean/variance (the inputs are untouched).
pub fn batchnorm_train(
    x: &Tensor,
    gamma: &Tensor,
    beta: &Tensor,
    moving_mean: &Tensor,
    moving_var: &Tensor,
) -> Result<(Tensor, BnCache, Tensor, Tensor)> {
    let c = check(x, &[gamma, beta, moving_mean, moving_var])?;
    if x.dim(0) < 2 {
        return Err(Error::DegenerateBatch(
            "batchnorm train mode needs batch size >= 2".into(),
        ));
    }
    let (n, h, w) = (x.dim(0), x.dim(1), x.dim(2));
    let m = n * h * w;
    let xd = x.data();

    let mut mean = vec![0f64; c];
    let mut var = vec![0f64; c];
    for row in xd.chunks_exact(c) {
        for (ci, &v) in row.iter().enumerate() {
            mean[ci] += v as f64;
        }
    }
    for mu in &mut mean {
        *mu /= m as f64;
    }
    for row in xd.chunks_exact(c) {
        for (ci, &v) in row.iter().enumerate() {
            let d = v as f64 - mean[ci];
            var[ci] += d * d;
        }
    }
    for va in &mut var {
        *va /= m as f64;
    }

    let inv_std: Vec<f32> = var
        .iter()
        .map(|&v| (1.0 / (v + BN_EPSILON as f64).sqrt()) as f32)
        .collect();

    let mut x_hat = vec![0f32; xd.len()];
    let mut y = vec![0f32; xd.len()];
    let gd = gamma.data();
    let bd = beta.data();
    for (off, row) in xd.chunks_exact(c).enumerate() {
        for (ci, &v) in row.iter().enumerate() {
            let xh = (v as f64 - mean[ci]) as f32 * inv_std[ci];
            x_hat[off * c + ci] = xh;
            y[off * c + ci] = gd[ci] * xh + bd[ci];
        }
    }

    let mut new_mm = moving_mean.clone();
    let mut new_mv = moving_var.clone();
    for ci in 0..c {
        let mm = &mut new_mm.data_mut()[ci];
        *mm = BN_MOMENTUM * *mm + (1.0 - BN_MOMENTUM) * mean[ci] as f32;
        let mv = &mut new_mv.data_mut()[ci];
        *mv = BN_MOMENTUM * *mv + (1.0 - BN_MOMENTUM) * var[ci] as f32;
    }

    let y = Tensor::new(x.shape(), y)?;
    let cache = BnCache {
        x_hat: Tensor::new(x.shape(), x_hat)?,
        inv_std,
        gamma: gamma.clone(),
        m,
    };
    Ok((y, cache, new_mm, new_mv))
}

/// Infer-mode forward: normalizes by the moving statistics, batch independent.
pub fn batchnorm_infer(
    x: &Tensor,
    gamma: &Tensor,
    beta: &Tensor,
    moving_mean: &Tensor,
    moving_var: &Tensor,
) -> Result<Tensor> {
    let c = check(x, &[gamma, beta, moving_mean, moving_var])?;
    let gd = gamma.data();
    let bd = beta.data();
    let mm = moving_mean.data();
    let mv = moving_var.data();
    let scale: Vec<f32> = (0..c).map(|ci| gd[ci] / (mv[ci] + BN_EPSILON).sqrt()).collect();
    let mut y = vec![0f32; x.numel()];
    for (off, row) in x.data().chunks_exact(c).enumerate() {
        for (ci, &v) in row.iter().enumerate() {
            y[off * c + ci] = scale[ci] * (v - mm[ci]) + bd[ci];
        }
    }
    Tensor::new(x.shape(), y)
}

/// Backward through the train-mode normalization, including the batch
/// mean/variance dependency on the input.
pub fn batchnorm_backward(cache: &BnCache, dy: &Tensor) -> Result<(Tensor, Tensor, Tensor)> {
    if dy.shape() != cache.x_hat.shape() {
        return Err(Error::Shape(format!(
            "batchnorm_backward dy must be {:?}, got {:?}",
            cache.x_hat.shape(),
            dy.shape()
        )));
    }
    let c = dy.dim(3);
    let m = cache.m as f64;
    let dyd = dy.data();
    let xh = cache.x_hat.data();
    let gd = cache.gamma.data();

    let mut dgamma = vec![0f64; c];
    let mut dbeta = vec![0f64; c];
    for (off, row) in dyd.chunks_exact(c).enumerate() {
        for (ci, &g) in row.iter().enumerate() {
            dbeta[ci] += g as f64;
            dgamma[ci] += g as f64 * xh[off * c + ci] as f64;
        }
    }

    // dx = inv_std/m * gamma * (m*dy - dbeta - x_hat * dgamma)
    let mut dx = vec![0f32; dyd.len()];
    for (off, row) in dyd.chunks_exact(c).enumerate() {
        for (ci, &g) in row.iter().enumerate() {
            let idx = off * c + ci;
            let term = m * g as f64 - dbeta[ci] - xh[idx] as f64 * dgamma[ci];
            dx[idx] = (gd[ci] as f64 * cache.inv_std[ci] as f64 / m * term) as f32;
        }
    }

    Ok((
        Tensor::new(dy.shape(), dx)?,
        Tensor::new(&[c], dgamma.iter().map(|&v| v as f32).collect())?,
        Tensor::new(&[c], dbeta.iter().map(|&v| v as f32).collect())?,
    ))
}
