//! Bilinear resampling with half-pixel-center alignment.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Maps output pixel centers to source coordinates via
/// `src = (dst + 0.5) · in/out − 0.5`, clamps to the source grid, and blends
/// the four surrounding pixels. The lerp form `a + f·(b − a)` keeps constant
/// regions exactly constant and every output within the source value range.
pub fn resize_bilinear(img: &Tensor, out_h: usize, out_w: usize) -> Result<Tensor> {
    if img.rank() != 3 || img.dim(2) != 3 {
        return Err(Error::Shape(format!("resize expects [H,W,3], got {:?}", img.shape())));
    }
    if out_h == 0 || out_w == 0 {
        return Err(Error::Shape("resize target must be non-empty".into()));
    }
    let (h, w) = (img.dim(0), img.dim(1));
    let src = img.data();
    let mut out = vec![0f32; out_h * out_w * 3];

    let coord = |o: usize, out_len: usize, in_len: usize| -> (usize, usize, f32) {
        let s = (o as f32 + 0.5) * in_len as f32 / out_len as f32 - 0.5;
        let s = s.clamp(0.0, (in_len - 1) as f32);
        let lo = s.floor() as usize;
        let hi = (lo + 1).min(in_len - 1);
        (lo, hi, s - lo as f32)
    };

    for oy in 0..out_h {
        let (y0, y1, fy) = coord(oy, out_h, h);
        for ox in 0..out_w {
            let (x0, x1, fx) = coord(ox, out_w, w);
            for c in 0..3 {
                let p = |y: usize, x: usize| src[(y * w + x) * 3 + c];
                let top = p(y0, x0) + fx * (p(y0, x1) - p(y0, x0));
                let bottom = p(y1, x0) + fx * (p(y1, x1) - p(y1, x0));
                out[(oy * out_w + ox) * 3 + c] = top + fy * (bottom - top);
            }
        }
    }
    Tensor::new(&[out_h, out_w, 3], out)
}
