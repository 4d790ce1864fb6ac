//! Parameter, FLOP, and memory accounting per graph and per layer.
//!
//! Published FLOP figures for architectures like these rarely state whether a
//! multiply-accumulate counts as one, two, or (with a doubled spatial
//! convention) four operations, so the calculator takes the convention
//! explicitly. `MacsX2` — one multiply plus one add per MAC — is the default;
//! `MacsX4` reproduces figures built on the doubled convention.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{Feat, LayerKind, ModelGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostConvention {
    /// One operation per multiply-accumulate; no bias term.
    MacsX1,
    /// Two operations per multiply-accumulate plus one bias add per conv
    /// output element.
    #[default]
    MacsX2,
    /// Four operations per multiply-accumulate plus one bias add per conv
    /// output element.
    MacsX4,
}

impl CostConvention {
    fn mac_factor(self) -> u64 {
        match self {
            CostConvention::MacsX1 => 1,
            CostConvention::MacsX2 => 2,
            CostConvention::MacsX4 => 4,
        }
    }

    fn conv_bias(self) -> u64 {
        match self {
            CostConvention::MacsX1 => 0,
            CostConvention::MacsX2 | CostConvention::MacsX4 => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CostConvention::MacsX1 => "macs-x1",
            CostConvention::MacsX2 => "macs-x2",
            CostConvention::MacsX4 => "macs-x4",
        }
    }
}

impl fmt::Display for CostConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for CostConvention {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl FromStr for CostConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "macs-x1" => Ok(CostConvention::MacsX1),
            "macs-x2" => Ok(CostConvention::MacsX2),
            "macs-x4" => Ok(CostConvention::MacsX4),
            other => Err(Error::Config(format!(
                "unknown FLOPs convention {other:?}; expected macs-x1, macs-x2, or macs-x4"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LayerCost {
    pub name: String,
    pub params: usize,
    pub trainable_params: usize,
    pub flops: u64,
    pub output_dims: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CostReport {
    pub model: String,
    pub convention: CostConvention,
    pub total_params: usize,
    pub trainable_params: usize,
    /// Per single forward pass of one image.
    pub flops: u64,
    pub memory_bytes: usize,
    pub per_layer: Vec<LayerCost>,
}

fn layer_params(g: &ModelGraph, kind: LayerKind, index: usize) -> (usize, usize) {
    let input = if index == 0 {
        let [h, w, c] = g.input_shape();
        Feat::Spatial { h, w, c }
    } else {
        g.layer_output(index - 1)
    };
    match (kind, input) {
        (LayerKind::Conv3x3 { out_channels }, Feat::Spatial { c, .. }) => {
            let p = 9 * c * out_channels + out_channels;
            (p, p)
        }
        (LayerKind::Dense { out_units }, Feat::Flat { width }) => {
            let p = width * out_units + out_units;
            (p, p)
        }
        (LayerKind::BatchNorm, Feat::Spatial { c, .. }) => (4 * c, 2 * c),
        _ => (0, 0),
    }
}

/// (total, trainable). Batchnorm contributes 4C parameters of which the two
/// moving statistics (2C) are not trained.
pub fn param_count(g: &ModelGraph) -> (usize, usize) {
    let mut total = 0;
    let mut trainable = 0;
    for (i, layer) in g.layers().iter().enumerate() {
        let (p, t) = layer_params(g, layer.kind, i);
        total += p;
        trainable += t;
    }
    (total, trainable)
}

/// 4 bytes per f32 parameter, moving statistics included.
pub fn memory_bytes(g: &ModelGraph) -> usize {
    4 * param_count(g).0
}

fn layer_flops(g: &ModelGraph, kind: LayerKind, index: usize, conv: CostConvention) -> u64 {
    let input = if index == 0 {
        let [h, w, c] = g.input_shape();
        Feat::Spatial { h, w, c }
    } else {
        g.layer_output(index - 1)
    };
    let output = g.layer_output(index);
    let out_elems = |f: Feat| -> u64 {
        match f {
            Feat::Spatial { h, w, c } => (h * w * c) as u64,
            Feat::Flat { width } => width as u64,
        }
    };
    match (kind, input) {
        (LayerKind::Conv3x3 { out_channels }, Feat::Spatial { h, w, c }) => {
            let positions = (h * w * out_channels) as u64;
            positions * (conv.mac_factor() * 9 * c as u64 + conv.conv_bias())
        }
        (LayerKind::Dense { out_units }, Feat::Flat { width }) => {
            conv.mac_factor() * (width * out_units) as u64
        }
        (LayerKind::MaxPool2 | LayerKind::AvgPool2, _) => 4 * out_elems(output),
        (LayerKind::BatchNorm, _) => 2 * out_elems(output),
        (LayerKind::Relu, _) => out_elems(output),
        (LayerKind::Softmax, Feat::Flat { width }) => 3 * width as u64,
        _ => 0,
    }
}

/// Cost of one forward pass of a single image, broken down per layer.
pub fn flop_count(g: &ModelGraph, convention: CostConvention) -> CostReport {
    let mut per_layer = Vec::with_capacity(g.layers().len());
    let mut flops = 0u64;
    let mut total_params = 0;
    let mut trainable_params = 0;
    for (i, layer) in g.layers().iter().enumerate() {
        let (p, t) = layer_params(g, layer.kind, i);
        let f = layer_flops(g, layer.kind, i, convention);
        flops += f;
        total_params += p;
        trainable_params += t;
        per_layer.push(LayerCost {
            name: layer.name.clone(),
            params: p,
            trainable_params: t,
            flops: f,
            output_dims: g.layer_output(i).dims(),
        });
    }
    CostReport {
        model: g.name().to_string(),
        convention,
        total_params,
        trainable_params,
        flops,
        memory_bytes: 4 * total_params,
        per_layer,
    }
}

/// Averaging T model outputs over `classes` classes costs 3 FLOPs per class
/// per sample on top of the member forward passes.
pub fn ensemble_flops(members: &[&CostReport], classes: usize) -> u64 {
    members.iter().map(|r| r.flops).sum::<u64>() + 3 * classes as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::zoo::{build_ir_brainnet, build_modified_demnet};
    use crate::model::{LayerSpec, ModelGraph};

    #[test]
    fn single_conv_parameter_formula() {
        let g = ModelGraph::new(
            "one-conv",
            [8, 8, 3],
            vec![LayerSpec::new("conv1", LayerKind::Conv3x3 { out_channels: 64 })],
        )
        .unwrap();
        assert_eq!(param_count(&g), (1_792, 1_792));
    }

    #[test]
    fn published_memory_figures() {
        let ir = build_ir_brainnet().unwrap();
        let md = build_modified_demnet().unwrap();
        assert_eq!(memory_bytes(&ir), 7_205_856);
        assert_eq!(memory_bytes(&md), 7_284_768);
        let total_mib = (memory_bytes(&ir) + memory_bytes(&md)) as f64 / (1024.0 * 1024.0);
        assert!((total_mib - 13.82).abs() < 0.01, "total = {total_mib} MiB");
    }

    #[test]
    fn dense_1024_to_100_is_204800_flops_under_default() {
        let g = build_ir_brainnet().unwrap();
        let report = flop_count(&g, CostConvention::default());
        let dense1 = report.per_layer.iter().find(|l| l.name == "dense1").unwrap();
        assert_eq!(dense1.flops, 204_800);
    }

    #[test]
    fn conv2_block_matches_the_doubled_convention_figure() {
        // 88·88·128·(4·9·64+1) for the conv plus 88·88·128 for its relu
        // comes to exactly 2,285,780,992 — the 2.2858 GFLOPs often quoted
        // for this stage under the doubled spatial convention.
        let g = build_ir_brainnet().unwrap();
        let report = flop_count(&g, CostConvention::MacsX4);
        let conv2 = report.per_layer.iter().find(|l| l.name == "conv2").unwrap();
        let relu2 = report.per_layer.iter().find(|l| l.name == "relu2").unwrap();
        assert_eq!(conv2.flops + relu2.flops, 2_285_780_992);
    }

    #[test]
    fn model_ordering_holds_under_every_convention() {
        let ir = build_ir_brainnet().unwrap();
        let md = build_modified_demnet().unwrap();
        for convention in [CostConvention::MacsX1, CostConvention::MacsX2, CostConvention::MacsX4]
        {
            let ri = flop_count(&ir, convention);
            let rm = flop_count(&md, convention);
            let ensemble = ensemble_flops(&[&ri, &rm], 4);
            assert!(rm.flops < ri.flops, "{convention}: {} !< {}", rm.flops, ri.flops);
            assert!(ri.flops < ensemble);
            assert_eq!(ensemble, ri.flops + rm.flops + 12);
        }
    }

    #[test]
    fn flops_are_additive_over_layers_and_zero_for_flatten() {
        let g = build_modified_demnet().unwrap();
        let report = flop_count(&g, CostConvention::default());
        let sum: u64 = report.per_layer.iter().map(|l| l.flops).sum();
        assert_eq!(sum, report.flops);
        let flatten = report.per_layer.iter().find(|l| l.name == "flatten").unwrap();
        assert_eq!(flatten.flops, 0);
        assert_eq!(flatten.params, 0);
    }

    #[test]
    fn convention_parses_from_flag_values() {
        assert_eq!("macs-x1".parse::<CostConvention>().unwrap(), CostConvention::MacsX1);
        assert_eq!("macs-x2".parse::<CostConvention>().unwrap(), CostConvention::MacsX2);
        assert_eq!("macs-x4".parse::<CostConvention>().unwrap(), CostConvention::MacsX4);
        assert!(matches!("flops".parse::<CostConvention>(), Err(Error::Config(_))));
    }

    #[test]
    fn report_totals_match_param_count() {
        let g = build_modified_demnet().unwrap();
        let report = flop_count(&g, CostConvention::default());
        let (total, trainable) = param_count(&g);
        assert_eq!(report.total_params, total);
        assert_eq!(report.trainable_params, trainable);
        assert_eq!(report.memory_bytes, memory_bytes(&g));
    }
}
