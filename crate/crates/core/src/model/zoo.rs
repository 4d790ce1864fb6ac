//! The two production architectures plus size-reduced variants of each for
//! fast end-to-end runs on synthetic data.

use crate::error::Result;
use crate::model::{LayerKind, LayerSpec, ModelGraph};

pub const INPUT_SHAPE: [usize; 3] = [176, 176, 3];
pub const NUM_CLASSES: usize = 4;

fn conv(name: &str, out_channels: usize) -> LayerSpec {
    LayerSpec::new(name, LayerKind::Conv3x3 { out_channels })
}

fn dense(name: &str, out_units: usize) -> LayerSpec {
    LayerSpec::new(name, LayerKind::Dense { out_units })
}

/// Six conv+relu+maxpool stages with filters 64,128,128,256,256,256 over a
/// 176×176×3 input, then flatten (2·2·256 = 1024), dense 100, dense 4,
/// softmax. 1,801,464 parameters, all trainable.
pub fn build_ir_brainnet() -> Result<ModelGraph> {
    let filters = [64, 128, 128, 256, 256, 256];
    let mut layers = Vec::new();
    for (i, &f) in filters.iter().enumerate() {
        let n = i + 1;
        layers.push(conv(&format!("conv{n}"), f));
        layers.push(LayerSpec::new(&format!("relu{n}"), LayerKind::Relu));
        layers.push(LayerSpec::new(&format!("pool{n}"), LayerKind::MaxPool2));
    }
    layers.push(LayerSpec::new("flatten", LayerKind::Flatten));
    layers.push(dense("dense1", 100));
    layers.push(LayerSpec::new("relu7", LayerKind::Relu));
    layers.push(dense("dense2", NUM_CLASSES));
    layers.push(LayerSpec::new("softmax", LayerKind::Softmax));
    ModelGraph::new("ir-brainnet", INPUT_SHAPE, layers)
}

/// Five double-conv blocks with filters 16,32,64,128,256; blocks two through
/// five end in batchnorm; the first and last pools are average, the middle
/// three max. Flatten width 5·5·256 = 6400, then dense 100, dense 4, softmax.
/// 1,821,192 parameters of which 960 (the moving statistics) are not trained.
pub fn build_modified_demnet() -> Result<ModelGraph> {
    struct Block {
        filters: usize,
        batchnorm: bool,
        pool: LayerKind,
    }
    let blocks = [
        Block { filters: 16, batchnorm: false, pool: LayerKind::AvgPool2 },
        Block { filters: 32, batchnorm: true, pool: LayerKind::MaxPool2 },
        Block { filters: 64, batchnorm: true, pool: LayerKind::MaxPool2 },
        Block { filters: 128, batchnorm: true, pool: LayerKind::MaxPool2 },
        Block { filters: 256, batchnorm: true, pool: LayerKind::AvgPool2 },
    ];
    let mut layers = Vec::new();
    let mut conv_idx = 0;
    let mut bn_idx = 0;
    for (i, block) in blocks.iter().enumerate() {
        for _ in 0..2 {
            conv_idx += 1;
            layers.push(conv(&format!("conv{conv_idx}"), block.filters));
            layers.push(LayerSpec::new(&format!("relu{conv_idx}"), LayerKind::Relu));
        }
        if block.batchnorm {
            bn_idx += 1;
            layers.push(LayerSpec::new(&format!("bn{bn_idx}"), LayerKind::BatchNorm));
        }
        layers.push(LayerSpec::new(&format!("pool{}", i + 1), block.pool));
    }
    layers.push(LayerSpec::new("flatten", LayerKind::Flatten));
    layers.push(dense("dense1", 100));
    layers.push(LayerSpec::new("relu11", LayerKind::Relu));
    layers.push(dense("dense2", NUM_CLASSES));
    layers.push(LayerSpec::new("softmax", LayerKind::Softmax));
    ModelGraph::new("modified-demnet", INPUT_SHAPE, layers)
}

pub const TOY_INPUT_SHAPE: [usize; 3] = [32, 32, 3];

/// Same stage pattern as IR-BRAINNET at a 32×32 input with 8,16,16,32
/// filters; flatten width 2·2·32 = 128.
pub fn build_toy_ir() -> Result<ModelGraph> {
    let filters = [8, 16, 16, 32];
    let mut layers = Vec::new();
    for (i, &f) in filters.iter().enumerate() {
        let n = i + 1;
        layers.push(conv(&format!("conv{n}"), f));
        layers.push(LayerSpec::new(&format!("relu{n}"), LayerKind::Relu));
        layers.push(LayerSpec::new(&format!("pool{n}"), LayerKind::MaxPool2));
    }
    layers.push(LayerSpec::new("flatten", LayerKind::Flatten));
    layers.push(dense("dense1", 32));
    layers.push(LayerSpec::new("relu5", LayerKind::Relu));
    layers.push(dense("dense2", NUM_CLASSES));
    layers.push(LayerSpec::new("softmax", LayerKind::Softmax));
    ModelGraph::new("toy-ir", TOY_INPUT_SHAPE, layers)
}

/// Same block pattern as Modified-DEMNET at a 32×32 input with 8,16,32
/// filters; flatten width 4·4·32 = 512.
pub fn build_toy_demnet() -> Result<ModelGraph> {
    let mut layers = vec![
        conv("conv1", 8),
        LayerSpec::new("relu1", LayerKind::Relu),
        conv("conv2", 8),
        LayerSpec::new("relu2", LayerKind::Relu),
        LayerSpec::new("pool1", LayerKind::AvgPool2),
        conv("conv3", 16),
        LayerSpec::new("relu3", LayerKind::Relu),
        conv("conv4", 16),
        LayerSpec::new("relu4", LayerKind::Relu),
        LayerSpec::new("bn1", LayerKind::BatchNorm),
        LayerSpec::new("pool2", LayerKind::MaxPool2),
        conv("conv5", 32),
        LayerSpec::new("relu5", LayerKind::Relu),
        conv("conv6", 32),
        LayerSpec::new("relu6", LayerKind::Relu),
        LayerSpec::new("bn2", LayerKind::BatchNorm),
        LayerSpec::new("pool3", LayerKind::MaxPool2),
        LayerSpec::new("flatten", LayerKind::Flatten),
    ];
    layers.push(dense("dense1", 32));
    layers.push(LayerSpec::new("relu7", LayerKind::Relu));
    layers.push(dense("dense2", NUM_CLASSES));
    layers.push(LayerSpec::new("softmax", LayerKind::Softmax));
    ModelGraph::new("toy-demnet", TOY_INPUT_SHAPE, layers)
}

/// Builder lookup by model name, as stored in checkpoints.
pub fn build_by_name(name: &str) -> Result<ModelGraph> {
    match name {
        "ir-brainnet" => build_ir_brainnet(),
        "modified-demnet" => build_modified_demnet(),
        "toy-ir" => build_toy_ir(),
        "toy-demnet" => build_toy_demnet(),
        other => Err(crate::error::Error::Config(format!("unknown model {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::cost::param_count;
    use crate::model::Feat;

    #[test]
    fn ir_brainnet_parameter_count_is_exact() {
        let g = build_ir_brainnet().unwrap();
        let (total, trainable) = param_count(&g);
        assert_eq!(total, 1_801_464);
        assert_eq!(trainable, 1_801_464);
    }

    #[test]
    fn ir_brainnet_conv2_holds_73856_parameters() {
        let g = build_ir_brainnet().unwrap();
        let w = g.param("conv2/w").unwrap();
        let b = g.param("conv2/b").unwrap();
        assert_eq!(w.shape(), &[3, 3, 64, 128]);
        assert_eq!(w.numel() + b.numel(), 73_856);
    }

    #[test]
    fn ir_brainnet_spatial_chain_ends_at_2x2x256() {
        let g = build_ir_brainnet().unwrap();
        let mut sizes = Vec::new();
        for (i, layer) in g.layers().iter().enumerate() {
            if matches!(layer.kind, LayerKind::MaxPool2) {
                if let Feat::Spatial { h, .. } = g.layer_output(i) {
                    sizes.push(h);
                }
            }
        }
        assert_eq!(sizes, [88, 44, 22, 11, 5, 2]);
        let flat = g
            .layers()
            .iter()
            .position(|l| matches!(l.kind, LayerKind::Flatten))
            .unwrap();
        assert_eq!(g.layer_output(flat), Feat::Flat { width: 1024 });
    }

    #[test]
    fn modified_demnet_parameter_count_is_exact() {
        let g = build_modified_demnet().unwrap();
        let (total, trainable) = param_count(&g);
        assert_eq!(total, 1_821_192);
        assert_eq!(total - trainable, 960);
    }

    #[test]
    fn modified_demnet_flattens_6400_features() {
        let g = build_modified_demnet().unwrap();
        let flat = g
            .layers()
            .iter()
            .position(|l| matches!(l.kind, LayerKind::Flatten))
            .unwrap();
        assert_eq!(g.layer_output(flat), Feat::Flat { width: 6400 });
    }

    #[test]
    fn modified_demnet_filter_progression() {
        let g = build_modified_demnet().unwrap();
        let filters: Vec<usize> = g
            .layers()
            .iter()
            .filter_map(|l| match l.kind {
                LayerKind::Conv3x3 { out_channels } => Some(out_channels),
                _ => None,
            })
            .collect();
        assert_eq!(filters, [16, 16, 32, 32, 64, 64, 128, 128, 256, 256]);
    }

    #[test]
    fn modified_demnet_pool_modes_are_avg_max_max_max_avg() {
        let g = build_modified_demnet().unwrap();
        let pools: Vec<LayerKind> = g
            .layers()
            .iter()
            .filter(|l| matches!(l.kind, LayerKind::MaxPool2 | LayerKind::AvgPool2))
            .map(|l| l.kind)
            .collect();
        assert_eq!(
            pools,
            [
                LayerKind::AvgPool2,
                LayerKind::MaxPool2,
                LayerKind::MaxPool2,
                LayerKind::MaxPool2,
                LayerKind::AvgPool2,
            ]
        );
    }

    #[test]
    fn toy_graphs_build_and_classify_four_ways() {
        for g in [build_toy_ir().unwrap(), build_toy_demnet().unwrap()] {
            assert_eq!(g.num_classes(), 4);
            assert_eq!(g.input_shape(), TOY_INPUT_SHAPE);
        }
    }

    #[test]
    fn build_by_name_round_trips_all_models() {
        for name in ["ir-brainnet", "modified-demnet", "toy-ir", "toy-demnet"] {
            assert_eq!(build_by_name(name).unwrap().name(), name);
        }
        assert!(build_by_name("resnet").is_err());
    }
}
