//! Finite-difference verification of analytic gradients.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Central-difference step. Small enough to stay in the near-linear regime of
/// f32 layer math, large enough that the difference survives rounding.
pub const DEFAULT_STEP: f32 = 1e-3;

#[derive(Debug, Clone, Copy)]
pub struct GradCheck {
    /// max_i |analytic_i - numeric_i| / max(1, |numeric_i|)
    pub max_error: f64,
    pub worst_index: usize,
    pub checked: usize,
}

/// Perturbs each parameter element by ±`step`, re-evaluates `loss`, and
/// compares the central difference against `analytic`. `loss` must be a pure
/// function of the parameter tensor.
pub fn gradient_check<F>(
    param: &Tensor,
    analytic: &Tensor,
    step: f32,
    mut loss: F,
) -> Result<GradCheck>
where
    F: FnMut(&Tensor) -> Result<f32>,
{
    if param.shape() != analytic.shape() {
        return Err(Error::Gradient(format!(
            "analytic gradient shape {:?} does not match parameter shape {:?}",
            analytic.shape(),
            param.shape()
        )));
    }
    if step <= 0.0 {
        return Err(Error::Gradient("finite-difference step must be positive".into()));
    }
    let mut probe = param.clone();
    let mut max_error = 0f64;
    let mut worst_index = 0;
    for i in 0..param.numel() {
        let original = probe.data()[i];
        probe.data_mut()[i] = original + step;
        let plus = loss(&probe)? as f64;
        probe.data_mut()[i] = original - step;
        let minus = loss(&probe)? as f64;
        probe.data_mut()[i] = original;
        let numeric = (plus - minus) / (2.0 * step as f64);
        let err = (analytic.data()[i] as f64 - numeric).abs() / numeric.abs().max(1.0);
        if err > max_error {
            max_error = err;
            worst_index = i;
        }
    }
    Ok(GradCheck {
        max_error,
        worst_index,
        checked: param.numel(),
    })
}
