//! Bias-corrected Adam over a graph's trainable parameters.

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::model::{Gradients, ModelGraph};
use crate::tensor::Tensor;

#[derive(Debug, Clone)]
pub struct AdamState {
    m: IndexMap<String, Tensor>,
    v: IndexMap<String, Tensor>,
    t: u64,
}

impl AdamState {
    /// Zeroed moments for every trainable parameter of the graph.
    pub fn new(g: &ModelGraph) -> Self {
        let mut m = IndexMap::new();
        let mut v = IndexMap::new();
        for name in g.trainable_param_names() {
            let shape = g.param(&name).expect("trainable name exists").shape().to_vec();
            m.insert(name.clone(), Tensor::zeros(&shape));
            v.insert(name, Tensor::zeros(&shape));
        }
        Self { m, v, t: 0 }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn moments(&self) -> impl Iterator<Item = (&str, &Tensor, &Tensor)> {
        self.m
            .iter()
            .zip(self.v.values())
            .map(|((k, m), v)| (k.as_str(), m, v))
    }

    /// Rebuilds a state from checkpoint tensors; shapes must mirror the
    /// graph's trainable parameters.
    pub fn restore(
        g: &ModelGraph,
        m: IndexMap<String, Tensor>,
        v: IndexMap<String, Tensor>,
        t: u64,
    ) -> Result<Self> {
        for name in g.trainable_param_names() {
            let shape = g.param(&name)?.shape();
            for (map, which) in [(&m, "m"), (&v, "v")] {
                let got = map.get(&name).ok_or_else(|| {
                    Error::Checkpoint(format!("missing adam {which} moment for {name:?}"))
                })?;
                if got.shape() != shape {
                    return Err(Error::Checkpoint(format!(
                        "adam {which} moment for {name:?} has shape {:?}, expected {shape:?}",
                        got.shape()
                    )));
                }
            }
        }
        Ok(Self { m, v, t })
    }
}

/// One Adam update: m←β1m+(1−β1)g, v←β2v+(1−β2)g², bias-corrected m̂ and v̂,
/// p←p−lr·m̂/(√v̂+ε). Parameters without a gradient this step decay their
/// moments against a zero gradient.
pub fn adam_step(
    g: &mut ModelGraph,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f32,
    beta1: f32,
    beta2: f32,
    epsilon: f32,
) -> Result<()> {
    if lr <= 0.0 {
        return Err(Error::Training(format!("learning rate must be positive, got {lr}")));
    }
    state.t += 1;
    let correction1 = 1.0 - (beta1 as f64).powi(state.t as i32);
    let correction2 = 1.0 - (beta2 as f64).powi(state.t as i32);
    let names: Vec<String> = state.m.keys().cloned().collect();
    for name in names {
        let grad = grads.get(&name);
        if let Some(grad) = grad {
            if !grad.is_finite() {
                return Err(Error::Training(format!("non-finite gradient for {name:?}")));
            }
        }
        let m = state.m.get_mut(&name).expect("key from this map");
        let v = state.v.get_mut(&name).expect("mirrored keys");
        let mut param = g.param(&name)?.clone();
        let pd = param.data_mut();
        let md = m.data_mut();
        let vd = v.data_mut();
        for i in 0..pd.len() {
            let gi = grad.map_or(0.0, |t| t.data()[i]);
            md[i] = beta1 * md[i] + (1.0 - beta1) * gi;
            vd[i] = beta2 * vd[i] + (1.0 - beta2) * gi * gi;
            let m_hat = md[i] as f64 / correction1;
            let v_hat = vd[i] as f64 / correction2;
            pd[i] -= (lr as f64 * m_hat / (v_hat.sqrt() + epsilon as f64)) as f32;
        }
        g.set_param(&name, param)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LayerKind, LayerSpec};
    use crate::ops::softmax_cross_entropy;

    fn one_dense_graph() -> ModelGraph {
        ModelGraph::new(
            "probe",
            [1, 1, 1],
            vec![
                LayerSpec::new("flatten", LayerKind::Flatten),
                LayerSpec::new("dense1", LayerKind::Dense { out_units: 2 }),
                LayerSpec::new("softmax", LayerKind::Softmax),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut g = one_dense_graph();
        g.set_param("dense1/w", Tensor::new(&[1, 2], vec![0.3, -0.7]).unwrap()).unwrap();
        let before = g.param("dense1/w").unwrap().clone();
        let mut state = AdamState::new(&g);
        adam_step(&mut g, &Gradients::default(), &mut state, 1e-4, 0.9, 0.999, 1e-7).unwrap();
        assert_eq!(g.param("dense1/w").unwrap().data(), before.data());
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn first_step_with_unit_gradient_moves_by_about_lr() {
        let mut g = one_dense_graph();
        let mut state = AdamState::new(&g);
        let mut grads = Gradients::default();
        grads.insert("dense1/b".into(), Tensor::new(&[2], vec![1.0, 1.0]).unwrap());
        adam_step(&mut g, &grads, &mut state, 1e-4, 0.9, 0.999, 1e-7).unwrap();
        let b = g.param("dense1/b").unwrap().data()[0];
        let expected = -1e-4 / (1.0 + 1e-7);
        assert!((b - expected).abs() < 1e-9, "b = {b}, expected {expected}");
    }

    #[test]
    fn identical_runs_share_a_trajectory() {
        let run = || {
            let mut g = one_dense_graph();
            g.set_param("dense1/w", Tensor::new(&[1, 2], vec![0.5, -0.5]).unwrap()).unwrap();
            let mut state = AdamState::new(&g);
            for _ in 0..10 {
                let x = Tensor::full(&[2, 1, 1, 1], 1.0);
                let pass = g.forward_train(&x).unwrap();
                let (_, _, dlogits) = softmax_cross_entropy(&pass.logits, &[0, 0]).unwrap();
                let grads = g.backward(&pass, &dlogits).unwrap();
                adam_step(&mut g, &grads, &mut state, 1e-3, 0.9, 0.999, 1e-7).unwrap();
            }
            g.param("dense1/w").unwrap().data().to_vec()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn non_finite_gradient_names_the_parameter() {
        let mut g = one_dense_graph();
        let mut state = AdamState::new(&g);
        let mut grads = Gradients::default();
        grads.insert("dense1/b".into(), Tensor::new(&[2], vec![f32::NAN, 0.0]).unwrap());
        let err = adam_step(&mut g, &grads, &mut state, 1e-4, 0.9, 0.999, 1e-7).unwrap_err();
        assert!(err.to_string().contains("dense1/b"), "{err}");
    }
}
