//! 2x2 pooling with stride 2. Odd trailing rows/columns are dropped (floor
//! semantics), so an 11x11 map pools to 5x5.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolMode {
    Max,
    Avg,
}

#[derive(Debug, Clone)]
pub struct PoolCache {
    pub mode: PoolMode,
    in_shape: Vec<usize>,
    /// For max mode: flat input index of each window's argmax, first in scan
    /// order on ties.
    argmax: Vec<u32>,
}

pub fn pool2d(x: &Tensor, mode: PoolMode) -> Result<(Tensor, PoolCache)> {
    if x.rank() != 4 {
        return Err(Error::Shape(format!("pool2d input must be [N,H,W,C], got {:?}", x.shape())));
    }
    let (n, h, w, c) = (x.dim(0), x.dim(1), x.dim(2), x.dim(3));
    if h < 2 || w < 2 {
        return Err(Error::Shape(format!("pool2d needs H,W >= 2, got {h}x{w}")));
    }
    let (ho, wo) = (h / 2, w / 2);
    let xd = x.data();
    let mut y = vec![0f32; n * ho * wo * c];
    let mut argmax = if mode == PoolMode::Max { vec![0u32; y.len()] } else { Vec::new() };

    for ni in 0..n {
        for i in 0..ho {
            for j in 0..wo {
                for ci in 0..c {
                    let yoff = ((ni * ho + i) * wo + j) * c + ci;
                    let mut best = f32::NEG_INFINITY;
                    let mut best_idx = 0u32;
                    let mut sum = 0f32;
                    for di in 0..2 {
                        for dj in 0..2 {
                            let xoff = ((ni * h + 2 * i + di) * w + 2 * j + dj) * c + ci;
                            let v = xd[xoff];
                            sum += v;
                            if v > best {
                                best = v;
                                best_idx = xoff as u32;
                            }
                        }
                    }
                    match mode {
                        PoolMode::Max => {
                            y[yoff] = best;
                            argmax[yoff] = best_idx;
                        }
                        PoolMode::Avg => y[yoff] = sum / 4.0,
                    }
                }
            }
        }
    }
    let y = Tensor::new(&[n, ho, wo, c], y)?;
    Ok((y, PoolCache { mode, in_shape: x.shape().to_vec(), argmax }))
}

/// Max mode routes each gradient to its argmax position; avg mode splits it
/// 1/4 to each window cell. Dropped rows/columns receive zero.
pub fn pool2d_backward(cache: &PoolCache, dy: &Tensor) -> Result<Tensor> {
    let (n, h, w, c) = (
        cache.in_shape[0],
        cache.in_shape[1],
        cache.in_shape[2],
        cache.in_shape[3],
    );
    let (ho, wo) = (h / 2, w / 2);
    if dy.shape() != [n, ho, wo, c] {
        return Err(Error::Shape(format!(
            "pool2d_backward dy must be [{n},{ho},{wo},{c}], got {:?}",
            dy.shape()
        )));
    }
    let dyd = dy.data();
    let mut dx = vec![0f32; n * h * w * c];
    match cache.mode {
        PoolMode::Max => {
            for (yoff, &g) in dyd.iter().enumerate() {
                dx[cache.argmax[yoff] as usize] += g;
            }
        }
        PoolMode::Avg => {
            for ni in 0..n {
                for i in 0..ho {
                    for j in 0..wo {
                        for ci in 0..c {
                            let g = dyd[((ni * ho + i) * wo + j) * c + ci] / 4.0;
                            for di in 0..2 {
                                for dj in 0..2 {
                                    dx[((ni * h + 2 * i + di) * w + 2 * j + dj) * c + ci] += g;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Tensor::new(&cache.in_shape, dx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window() -> Tensor {
        // [[1, 5], [3, 2]]
        Tensor::new(&[1, 2, 2, 1], vec![1.0, 5.0, 3.0, 2.0]).unwrap()
    }

    #[test]
    fn four_number_window() {
        let x = window();
        let (ymax, _) = pool2d(&x, PoolMode::Max).unwrap();
        let (yavg, _) = pool2d(&x, PoolMode::Avg).unwrap();
        assert_eq!(ymax.data(), &[5.0]);
        assert_eq!(yavg.data(), &[2.75]);
    }

    #[test]
    fn floor_semantics_drop_trailing_row_col() {
        let x = Tensor::zeros(&[1, 11, 11, 2]);
        let (y, _) = pool2d(&x, PoolMode::Max).unwrap();
        assert_eq!(y.shape(), &[1, 5, 5, 2]);
    }

    #[test]
    fn constant_input_pools_to_constant() {
        let x = Tensor::full(&[2, 4, 6, 3], 7.5);
        let (ymax, _) = pool2d(&x, PoolMode::Max).unwrap();
        let (yavg, _) = pool2d(&x, PoolMode::Avg).unwrap();
        assert!(ymax.data().iter().all(|&v| v == 7.5));
        assert!(yavg.data().iter().all(|&v| v == 7.5));
    }

    #[test]
    fn too_small_input_is_a_shape_error() {
        let x = Tensor::zeros(&[1, 1, 4, 1]);
        assert!(pool2d(&x, PoolMode::Max).is_err());
    }

    #[test]
    fn max_backward_routes_to_first_argmax_on_ties() {
        let x = Tensor::new(&[1, 2, 2, 1], vec![4.0, 4.0, 1.0, 4.0]).unwrap();
        let (_, cache) = pool2d(&x, PoolMode::Max).unwrap();
        let dy = Tensor::new(&[1, 1, 1, 1], vec![2.0]).unwrap();
        let dx = pool2d_backward(&cache, &dy).unwrap();
        assert_eq!(dx.data(), &[2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn backward_conserves_gradient_mass() {
        let x = Tensor::new(
            &[1, 4, 4, 1],
            (0..16).map(|i| (i as f32 * 17.0) % 7.0).collect(),
        )
        .unwrap();
        for mode in [PoolMode::Max, PoolMode::Avg] {
            let (_, cache) = pool2d(&x, mode).unwrap();
            let dy = Tensor::new(&[1, 2, 2, 1], vec![0.5, -1.5, 2.0, 3.0]).unwrap();
            let dx = pool2d_backward(&cache, &dy).unwrap();
            let sum_dx: f32 = dx.data().iter().sum();
            let sum_dy: f32 = dy.data().iter().sum();
            assert!((sum_dx - sum_dy).abs() < 1e-6);
        }
    }
}
