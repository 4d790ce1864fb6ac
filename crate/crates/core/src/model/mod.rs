//! Declarative layer graphs with shape inference, forward passes in train and
//! infer mode, and a hand-derived backward pass over the recorded caches.

pub mod cost;
pub mod init;
pub mod zoo;

pub use cost::{
    ensemble_flops, flop_count, memory_bytes, param_count, CostConvention, CostReport, LayerCost,
};
pub use init::{import_pretrained_layer, kaiming_init};
pub use zoo::{build_by_name, INPUT_SHAPE, NUM_CLASSES};

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::ops::{
    batchnorm_backward, batchnorm_infer, batchnorm_train, conv2d, conv2d_backward, dense,
    dense_backward, flatten, flatten_backward, pool2d, pool2d_backward, relu, relu_backward,
    softmax, BnCache, PoolCache, PoolMode,
};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Conv3x3 { out_channels: usize },
    MaxPool2,
    AvgPool2,
    BatchNorm,
    Flatten,
    Dense { out_units: usize },
    Relu,
    Softmax,
}

#[derive(Debug, Clone)]
pub struct LayerSpec {
    pub name: String,
    pub kind: LayerKind,
}

impl LayerSpec {
    pub fn new(name: &str, kind: LayerKind) -> Self {
        Self { name: name.to_string(), kind }
    }
}

/// Feature shape between layers, excluding the batch axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feat {
    Spatial { h: usize, w: usize, c: usize },
    Flat { width: usize },
}

impl Feat {
    pub fn dims(&self) -> Vec<usize> {
        match *self {
            Feat::Spatial { h, w, c } => vec![h, w, c],
            Feat::Flat { width } => vec![width],
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelGraph {
    name: String,
    input_shape: [usize; 3],
    layers: Vec<LayerSpec>,
    /// Inferred output feature shape of each layer, parallel to `layers`.
    out_feats: Vec<Feat>,
    params: IndexMap<String, Tensor>,
}

fn infer_feat(layer: &LayerSpec, input: Feat, is_last: bool) -> Result<Feat> {
    let spatial = |what: &str| -> Result<(usize, usize, usize)> {
        match input {
            Feat::Spatial { h, w, c } => Ok((h, w, c)),
            Feat::Flat { .. } => Err(Error::Shape(format!(
                "layer {:?} ({what}) needs a spatial input, got a flat one",
                layer.name
            ))),
        }
    };
    match layer.kind {
        LayerKind::Conv3x3 { out_channels } => {
            let (h, w, _) = spatial("conv3x3")?;
            Ok(Feat::Spatial { h, w, c: out_channels })
        }
        LayerKind::MaxPool2 | LayerKind::AvgPool2 => {
            let (h, w, c) = spatial("pool")?;
            if h < 2 || w < 2 {
                return Err(Error::Shape(format!(
                    "layer {:?}: cannot pool a {h}x{w} map",
                    layer.name
                )));
            }
            Ok(Feat::Spatial { h: h / 2, w: w / 2, c })
        }
        LayerKind::BatchNorm | LayerKind::Relu => Ok(input),
        LayerKind::Flatten => {
            let (h, w, c) = spatial("flatten")?;
            Ok(Feat::Flat { width: h * w * c })
        }
        LayerKind::Dense { out_units } => match input {
            Feat::Flat { .. } => Ok(Feat::Flat { width: out_units }),
            Feat::Spatial { .. } => Err(Error::Shape(format!(
                "layer {:?} (dense) needs a flat input; add a flatten layer first",
                layer.name
            ))),
        },
        LayerKind::Softmax => {
            if !is_last {
                return Err(Error::Shape(format!(
                    "layer {:?}: softmax must be the final layer",
                    layer.name
                )));
            }
            match input {
                Feat::Flat { width } => Ok(Feat::Flat { width }),
                Feat::Spatial { .. } => Err(Error::Shape(format!(
                    "layer {:?} (softmax) needs a flat input",
                    layer.name
                ))),
            }
        }
    }
}

impl ModelGraph {
    /// Validates the layer chain, infers every intermediate shape, and
    /// allocates parameters: conv/dense weights and biases zeroed, batchnorm
    /// gamma 1 / beta 0 / moving mean 0 / moving variance 1.
    pub fn new(name: &str, input_shape: [usize; 3], layers: Vec<LayerSpec>) -> Result<Self> {
        let mut params = IndexMap::new();
        let mut out_feats = Vec::with_capacity(layers.len());
        let mut feat = Feat::Spatial {
            h: input_shape[0],
            w: input_shape[1],
            c: input_shape[2],
        };
        let mut seen = std::collections::HashSet::new();
        for (i, layer) in layers.iter().enumerate() {
            if layer.name.is_empty() || layer.name.contains(['/', ' ']) {
                return Err(Error::Config(format!(
                    "layer name {:?} must be non-empty without '/' or spaces",
                    layer.name
                )));
            }
            if !seen.insert(layer.name.clone()) {
                return Err(Error::Config(format!("duplicate layer name {:?}", layer.name)));
            }
            match layer.kind {
                LayerKind::Conv3x3 { out_channels } => {
                    let cin = match feat {
                        Feat::Spatial { c, .. } => c,
                        Feat::Flat { .. } => 0,
                    };
                    if cin > 0 {
                        params.insert(
                            format!("{}/w", layer.name),
                            Tensor::zeros(&[3, 3, cin, out_channels]),
                        );
                        params.insert(format!("{}/b", layer.name), Tensor::zeros(&[out_channels]));
                    }
                }
                LayerKind::Dense { out_units } => {
                    if let Feat::Flat { width } = feat {
                        params.insert(
                            format!("{}/w", layer.name),
                            Tensor::zeros(&[width, out_units]),
                        );
                        params.insert(format!("{}/b", layer.name), Tensor::zeros(&[out_units]));
                    }
                }
                LayerKind::BatchNorm => {
                    if let Feat::Spatial { c, .. } = feat {
                        params.insert(format!("{}/gamma", layer.name), Tensor::full(&[c], 1.0));
                        params.insert(format!("{}/beta", layer.name), Tensor::zeros(&[c]));
                        params
                            .insert(format!("{}/moving_mean", layer.name), Tensor::zeros(&[c]));
                        params
                            .insert(format!("{}/moving_var", layer.name), Tensor::full(&[c], 1.0));
                    }
                }
                _ => {}
            }
            feat = infer_feat(layer, feat, i + 1 == layers.len())?;
            out_feats.push(feat);
        }
        Ok(Self {
            name: name.to_string(),
            input_shape,
            layers,
            out_feats,
            params,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn input_shape(&self) -> [usize; 3] {
        self.input_shape
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    /// Inferred output feature dims of each layer (batch axis excluded).
    pub fn layer_output(&self, index: usize) -> Feat {
        self.out_feats[index]
    }

    pub fn num_classes(&self) -> usize {
        match self.out_feats.last() {
            Some(Feat::Flat { width }) => *width,
            _ => 0,
        }
    }

    pub fn params(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.params.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn param(&self, name: &str) -> Result<&Tensor> {
        self.params
            .get(name)
            .ok_or_else(|| Error::NotFound(format!("no parameter {name:?} in model {:?}", self.name)))
    }

    pub fn set_param(&mut self, name: &str, value: Tensor) -> Result<()> {
        let slot = self
            .params
            .get_mut(name)
            .ok_or_else(|| Error::NotFound(format!("no parameter {name:?} in model {:?}", self.name)))?;
        if slot.shape() != value.shape() {
            return Err(Error::Shape(format!(
                "parameter {name:?} has shape {:?}, got {:?}",
                slot.shape(),
                value.shape()
            )));
        }
        *slot = value;
        Ok(())
    }

    /// Parameter names that receive gradient updates: everything except the
    /// batchnorm moving statistics.
    pub fn trainable_param_names(&self) -> Vec<String> {
        self.params
            .keys()
            .filter(|k| !k.ends_with("/moving_mean") && !k.ends_with("/moving_var"))
            .cloned()
            .collect()
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        let [h, w, c] = self.input_shape;
        if x.rank() != 4 || x.dim(1) != h || x.dim(2) != w || x.dim(3) != c {
            return Err(Error::Shape(format!(
                "model {:?} expects input [N,{h},{w},{c}], got {:?}",
                self.name,
                x.shape()
            )));
        }
        Ok(())
    }

    /// Inference forward pass: batchnorm uses moving statistics, the final
    /// softmax is applied, and the graph is untouched.
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        self.check_input(x)?;
        let mut cur = x.clone();
        for layer in &self.layers {
            cur = match layer.kind {
                LayerKind::Conv3x3 { .. } => conv2d(
                    &cur,
                    self.param(&format!("{}/w", layer.name))?,
                    self.param(&format!("{}/b", layer.name))?,
                )?,
                LayerKind::MaxPool2 => pool2d(&cur, PoolMode::Max)?.0,
                LayerKind::AvgPool2 => pool2d(&cur, PoolMode::Avg)?.0,
                LayerKind::BatchNorm => batchnorm_infer(
                    &cur,
                    self.param(&format!("{}/gamma", layer.name))?,
                    self.param(&format!("{}/beta", layer.name))?,
                    self.param(&format!("{}/moving_mean", layer.name))?,
                    self.param(&format!("{}/moving_var", layer.name))?,
                )?,
                LayerKind::Flatten => flatten(&cur)?,
                LayerKind::Dense { .. } => dense(
                    &cur,
                    self.param(&format!("{}/w", layer.name))?,
                    self.param(&format!("{}/b", layer.name))?,
                )?,
                LayerKind::Relu => relu(&cur),
                LayerKind::Softmax => softmax(&cur)?,
            };
        }
        Ok(cur)
    }

    /// Infer-mode forward over a large batch in chunks of `batch` rows,
    /// bounding peak activation memory.
    pub fn predict_batched(&self, x: &Tensor, batch: usize) -> Result<Tensor> {
        self.check_input(x)?;
        let n = x.dim(0);
        let batch = batch.max(1);
        let classes = self.num_classes();
        let mut out = Vec::with_capacity(n * classes);
        let mut start = 0;
        while start < n {
            let end = (start + batch).min(n);
            let idx: Vec<usize> = (start..end).collect();
            let probs = self.forward(&x.gather_rows(&idx)?)?;
            out.extend_from_slice(probs.data());
            start = end;
        }
        Tensor::new(&[n, classes], out)
    }

    /// Train-mode forward pass up to the logits (the terminal softmax is left
    /// to the fused loss). Records per-layer caches for `backward` and
    /// updates the batchnorm moving statistics in place.
    pub fn forward_train(&mut self, x: &Tensor) -> Result<TrainPass> {
        self.check_input(x)?;
        let mut cur = x.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut stat_updates: Vec<(String, Tensor)> = Vec::new();
        for layer in &self.layers {
            match layer.kind {
                LayerKind::Conv3x3 { .. } => {
                    let y = conv2d(
                        &cur,
                        self.param(&format!("{}/w", layer.name))?,
                        self.param(&format!("{}/b", layer.name))?,
                    )?;
                    caches.push(Cache::Conv { x: cur });
                    cur = y;
                }
                LayerKind::MaxPool2 | LayerKind::AvgPool2 => {
                    let mode = if layer.kind == LayerKind::MaxPool2 {
                        PoolMode::Max
                    } else {
                        PoolMode::Avg
                    };
                    let (y, cache) = pool2d(&cur, mode)?;
                    caches.push(Cache::Pool(cache));
                    cur = y;
                }
                LayerKind::BatchNorm => {
                    let (y, cache, mm, mv) = batchnorm_train(
                        &cur,
                        self.param(&format!("{}/gamma", layer.name))?,
                        self.param(&format!("{}/beta", layer.name))?,
                        self.param(&format!("{}/moving_mean", layer.name))?,
                        self.param(&format!("{}/moving_var", layer.name))?,
                    )?;
                    stat_updates.push((format!("{}/moving_mean", layer.name), mm));
                    stat_updates.push((format!("{}/moving_var", layer.name), mv));
                    caches.push(Cache::Bn(cache));
                    cur = y;
                }
                LayerKind::Flatten => {
                    let y = flatten(&cur)?;
                    caches.push(Cache::Flatten { shape: cur.shape().to_vec() });
                    cur = y;
                }
                LayerKind::Dense { .. } => {
                    let y = dense(
                        &cur,
                        self.param(&format!("{}/w", layer.name))?,
                        self.param(&format!("{}/b", layer.name))?,
                    )?;
                    caches.push(Cache::Dense { x: cur });
                    cur = y;
                }
                LayerKind::Relu => {
                    let y = relu(&cur);
                    caches.push(Cache::Relu { x: cur });
                    cur = y;
                }
                LayerKind::Softmax => {
                    caches.push(Cache::Identity);
                }
            }
        }
        for (name, value) in stat_updates {
            self.set_param(&name, value)?;
        }
        Ok(TrainPass { logits: cur, caches })
    }

    /// Backpropagates `dlogits` (gradient of the loss with respect to the
    /// logits) through the recorded pass, returning gradients keyed like the
    /// parameter map. Batchnorm moving statistics get no gradients.
    pub fn backward(&self, pass: &TrainPass, dlogits: &Tensor) -> Result<Gradients> {
        if pass.caches.len() != self.layers.len() {
            return Err(Error::Gradient(
                "train pass does not match this graph's layer count".into(),
            ));
        }
        let mut grads = Gradients::default();
        let mut dcur = dlogits.clone();
        for (layer, cache) in self.layers.iter().zip(&pass.caches).rev() {
            match (&layer.kind, cache) {
                (LayerKind::Conv3x3 { .. }, Cache::Conv { x }) => {
                    let w = self.param(&format!("{}/w", layer.name))?;
                    let (dx, dw, db) = conv2d_backward(x, w, &dcur)?;
                    grads.insert(format!("{}/w", layer.name), dw);
                    grads.insert(format!("{}/b", layer.name), db);
                    dcur = dx;
                }
                (LayerKind::MaxPool2 | LayerKind::AvgPool2, Cache::Pool(cache)) => {
                    dcur = pool2d_backward(cache, &dcur)?;
                }
                (LayerKind::BatchNorm, Cache::Bn(cache)) => {
                    let (dx, dgamma, dbeta) = batchnorm_backward(cache, &dcur)?;
                    grads.insert(format!("{}/gamma", layer.name), dgamma);
                    grads.insert(format!("{}/beta", layer.name), dbeta);
                    dcur = dx;
                }
                (LayerKind::Flatten, Cache::Flatten { shape }) => {
                    dcur = flatten_backward(shape, &dcur)?;
                }
                (LayerKind::Dense { .. }, Cache::Dense { x }) => {
                    let w = self.param(&format!("{}/w", layer.name))?;
                    let (dx, dw, db) = dense_backward(x, w, &dcur)?;
                    grads.insert(format!("{}/w", layer.name), dw);
                    grads.insert(format!("{}/b", layer.name), db);
                    dcur = dx;
                }
                (LayerKind::Relu, Cache::Relu { x }) => {
                    dcur = relu_backward(x, &dcur)?;
                }
                (LayerKind::Softmax, Cache::Identity) => {}
                _ => {
                    return Err(Error::Gradient(format!(
                        "cache mismatch at layer {:?}",
                        layer.name
                    )))
                }
            }
        }
        Ok(grads)
    }
}

/// Per-layer activations recorded by the forward pass for use in backward.
#[derive(Debug, Clone)]
enum Cache {
    Conv { x: Tensor },
    Pool(PoolCache),
    Bn(BnCache),
    Flatten { shape: Vec<usize> },
    Dense { x: Tensor },
    Relu { x: Tensor },
    Identity,
}

#[derive(Debug, Clone)]
pub struct TrainPass {
    pub logits: Tensor,
    caches: Vec<Cache>,
}

impl TrainPass {
    pub fn probs(&self) -> Result<Tensor> {
        softmax(&self.logits)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Gradients {
    grads: IndexMap<String, Tensor>,
}

impl Gradients {
    pub fn insert(&mut self, name: String, grad: Tensor) {
        self.grads.insert(name, grad);
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.grads.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.grads.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }
}
