//! Fully connected layer: y = x·W + b with x [N,Din], W [Din,Dout], b [Dout].

use crate::error::{Error, Result};
use crate::tensor::Tensor;

fn check(x: &Tensor, w: &Tensor, b: Option<&Tensor>) -> Result<(usize, usize, usize)> {
    if x.rank() != 2 {
        return Err(Error::Shape(format!("dense input must be [N,Din], got {:?}", x.shape())));
    }
    if w.rank() != 2 {
        return Err(Error::Shape(format!("dense weight must be [Din,Dout], got {:?}", w.shape())));
    }
    let (n, din) = (x.dim(0), x.dim(1));
    let dout = w.dim(1);
    if w.dim(0) != din {
        return Err(Error::Shape(format!(
            "dense weight expects {din} inputs, got {:?}",
            w.shape()
        )));
    }
    if let Some(b) = b {
        if b.shape() != [dout] {
            return Err(Error::Shape(format!("dense bias must be [{dout}], got {:?}", b.shape())));
        }
    }
    Ok((n, din, dout))
}

pub fn dense(x: &Tensor, w: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (n, din, dout) = check(x, w, Some(b))?;
    let xd = x.data();
    let wd = w.data();
    let bd = b.data();
    let mut y = vec![0f32; n * dout];
    for i in 0..n {
        let row = &xd[i * din..(i + 1) * din];
        let out = &mut y[i * dout..(i + 1) * dout];
        out.copy_from_slice(bd);
        for (k, &xv) in row.iter().enumerate() {
            if xv == 0.0 {
                continue;
            }
            let wrow = &wd[k * dout..(k + 1) * dout];
            for (o, &wv) in out.iter_mut().zip(wrow) {
                *o += xv * wv;
            }
        }
    }
    Tensor::new(&[n, dout], y)
}

pub fn dense_backward(x: &Tensor, w: &Tensor, dy: &Tensor) -> Result<(Tensor, Tensor, Tensor)> {
    let (n, din, dout) = check(x, w, None)?;
    if dy.shape() != [n, dout] {
        return Err(Error::Shape(format!(
            "dense_backward dy must be [{n},{dout}], got {:?}",
            dy.shape()
        )));
    }
    let xd = x.data();
    let wd = w.data();
    let dyd = dy.data();

    let mut dx = vec![0f32; n * din];
    let mut dw = vec![0f32; din * dout];
    let mut db = vec![0f32; dout];
    for i in 0..n {
        let grow = &dyd[i * dout..(i + 1) * dout];
        for (ci, &g) in grow.iter().enumerate() {
            db[ci] += g;
        }
        let xrow = &xd[i * din..(i + 1) * din];
        let dxrow = &mut dx[i * din..(i + 1) * din];
        for k in 0..din {
            let wrow = &wd[k * dout..(k + 1) * dout];
            let dwrow = &mut dw[k * dout..(k + 1) * dout];
            let xv = xrow[k];
            let mut acc = 0f32;
            for ci in 0..dout {
                acc += grow[ci] * wrow[ci];
                dwrow[ci] += xv * grow[ci];
            }
            dxrow[k] = acc;
        }
    }
    Ok((
        Tensor::new(&[n, din], dx)?,
        Tensor::new(&[din, dout], dw)?,
        Tensor::new(&[dout], db)?,
    ))
}
