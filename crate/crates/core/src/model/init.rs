//! Weight initialization and pretrained-layer import.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::archive::WeightArchive;
use crate::error::{Error, Result};
use crate::model::{LayerKind, ModelGraph};
use crate::tensor::Tensor;

/// Draws every conv and dense weight from Normal(0, 2/n_in) with n_in = 9·Cin
/// for conv and Din for dense; biases stay zero and batchnorm parameters keep
/// their identity defaults. ChaCha8 keyed by `seed` makes the result
/// bit-identical across platforms and runs.
pub fn kaiming_init(mut g: ModelGraph, seed: u64) -> ModelGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layer_names: Vec<(String, LayerKind)> = g
        .layers()
        .iter()
        .map(|l| (l.name.clone(), l.kind))
        .collect();
    for (name, kind) in layer_names {
        if !matches!(kind, LayerKind::Conv3x3 { .. } | LayerKind::Dense { .. }) {
            continue;
        }
        let key = format!("{name}/w");
        let shape = g.param(&key).expect("builder allocates conv/dense weights").shape().to_vec();
        let n_in: usize = match kind {
            LayerKind::Conv3x3 { .. } => 9 * shape[2],
            LayerKind::Dense { .. } => shape[0],
            _ => unreachable!(),
        };
        let normal = Normal::new(0.0f64, (2.0 / n_in as f64).sqrt()).expect("positive std");
        let data: Vec<f32> = (0..shape.iter().product())
            .map(|_| normal.sample(&mut rng) as f32)
            .collect();
        g.set_param(&key, Tensor::new(&shape, data).expect("shape preserved"))
            .expect("parameter exists");
    }
    g
}

/// Replaces one layer's weights and biases with archive entries
/// `<entry_name>/w` and `<entry_name>/b`. The imported parameters stay
/// trainable; shapes must match the target layer exactly.
pub fn import_pretrained_layer(
    mut g: ModelGraph,
    layer_name: &str,
    archive: &WeightArchive,
    entry_name: &str,
) -> Result<(ModelGraph, usize)> {
    let mut imported = 0;
    for suffix in ["w", "b"] {
        let target = format!("{layer_name}/{suffix}");
        let want = g
            .param(&target)
            .map_err(|_| Error::NotFound(format!("model has no parameter {target:?}")))?
            .shape()
            .to_vec();
        let source = format!("{entry_name}/{suffix}");
        let entry = archive
            .get(&source)
            .ok_or_else(|| Error::NotFound(format!("archive has no entry {source:?}")))?;
        if entry.shape() != want {
            return Err(Error::Transfer(format!(
                "entry {source:?} has shape {:?} but layer {layer_name:?} expects {want:?}",
                entry.shape()
            )));
        }
        imported += entry.numel();
        g.set_param(&target, entry.clone())?;
    }
    Ok((g, imported))
}
