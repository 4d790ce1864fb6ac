//! 3x3 convolution with stride 1 and zero ("same") padding, NHWC layout.
//! Weights are laid out `[3, 3, Cin, Cout]` so the innermost loop runs over
//! output channels, which are contiguous.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

const K: usize = 3;

fn check_shapes(x: &Tensor, w: &Tensor, b: &Tensor) -> Result<(usize, usize, usize, usize, usize)> {
    if x.rank() != 4 {
        return Err(Error::Shape(format!("conv2d input must be [N,H,W,Cin], got {:?}", x.shape())));
    }
    if w.rank() != 4 || w.dim(0) != K || w.dim(1) != K {
        return Err(Error::Shape(format!("conv2d kernel must be [3,3,Cin,Cout], got {:?}", w.shape())));
    }
    let (n, h, wd, cin) = (x.dim(0), x.dim(1), x.dim(2), x.dim(3));
    let cout = w.dim(3);
    if w.dim(2) != cin {
        return Err(Error::Shape(format!(
            "conv2d channel mismatch: input has {cin} channels, kernel expects {}",
            w.dim(2)
        )));
    }
    if b.shape() != [cout] {
        return Err(Error::Shape(format!("conv2d bias must be [{cout}], got {:?}", b.shape())));
    }
    Ok((n, h, wd, cin, cout))
}

/// `y[n,i,j,o] = b[o] + sum over the 3x3xCin window of x*w`, zero padded.
pub fn conv2d(x: &Tensor, w: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (n, h, wd, cin, cout) = check_shapes(x, w, b)?;
    let xd = x.data();
    let wd_ = w.data();
    let bd = b.data();
    let mut y = vec![0f32; n * h * wd * cout];
    let mut acc = vec![0f32; cout];

    for ni in 0..n {
        let x_base = ni * h * wd * cin;
        let y_base = ni * h * wd * cout;
        for i in 0..h {
            for j in 0..wd {
                acc.copy_from_slice(bd);
                for di in 0..K {
                    let ii = i as isize + di as isize - 1;
                    if ii < 0 || ii >= h as isize {
                        continue;
                    }
                    for dj in 0..K {
                        let jj = j as isize + dj as isize - 1;
                        if jj < 0 || jj >= wd as isize {
                            continue;
                        }
                        let xoff = x_base + (ii as usize * wd + jj as usize) * cin;
                        let woff = (di * K + dj) * cin * cout;
                        for ci in 0..cin {
                            let xv = xd[xoff + ci];
                            let wrow = &wd_[woff + ci * cout..woff + (ci + 1) * cout];
                            for (o, &wv) in wrow.iter().enumerate() {
                                acc[o] += xv * wv;
                            }
                        }
                    }
                }
                y[y_base + (i * wd + j) * cout..y_base + (i * wd + j + 1) * cout]
                    .copy_from_slice(&acc);
            }
        }
    }
    Tensor::new(&[n, h, wd, cout], y)
}

/// Exact adjoints of [`conv2d`]: gradients for input, kernel, and bias.
pub fn conv2d_backward(x: &Tensor, w: &Tensor, dy: &Tensor) -> Result<(Tensor, Tensor, Tensor)> {
    let cout = w.dim(3);
    let bias = Tensor::zeros(&[cout]);
    let (n, h, wd, cin, _) = check_shapes(x, w, &bias)?;
    if dy.shape() != [n, h, wd, cout] {
        return Err(Error::Shape(format!(
            "conv2d_backward dy must be [{n},{h},{wd},{cout}], got {:?}",
            dy.shape()
        )));
    }
    let xd = x.data();
    let wd_ = w.data();
    let dyd = dy.data();
    let mut dx = vec![0f32; xd.len()];
    let mut dw = vec![0f32; wd_.len()];
    let mut db = vec![0f32; cout];

    for ni in 0..n {
        let x_base = ni * h * wd * cin;
        let y_base = ni * h * wd * cout;
        for i in 0..h {
            for j in 0..wd {
                let dyrow = &dyd[y_base + (i * wd + j) * cout..y_base + (i * wd + j + 1) * cout];
                for (o, &g) in dyrow.iter().enumerate() {
                    db[o] += g;
                }
                for di in 0..K {
                    let ii = i as isize + di as isize - 1;
                    if ii < 0 || ii >= h as isize {
                        continue;
                    }
                    for dj in 0..K {
                        let jj = j as isize + dj as isize - 1;
                        if jj < 0 || jj >= wd as isize {
                            continue;
                        }
                        let xoff = x_base + (ii as usize * wd + jj as usize) * cin;
                        let woff = (di * K + dj) * cin * cout;
                        for ci in 0..cin {
                            let xv = xd[xoff + ci];
                            let wrow = &wd_[woff + ci * cout..woff + (ci + 1) * cout];
                            let dwrow = &mut dw[woff + ci * cout..woff + (ci + 1) * cout];
                            let mut s = 0f32;
                            for (o, &g) in dyrow.iter().enumerate() {
                                s += wrow[o] * g;
                                dwrow[o] += xv * g;
                            }
                            dx[xoff + ci] += s;
                        }
                    }
                }
            }
        }
    }
    Ok((
        Tensor::new(x.shape(), dx)?,
        Tensor::new(w.shape(), dw)?,
        Tensor::new(&[cout], db)?,
    ))
}
