//! Synthetic 4-class fixture: 32×32 RGB images where the class is encoded by
//! which quadrant is bright. Separable enough that the scaled-down
//! architectures converge in a few epochs, noisy enough to be non-trivial.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{LabeledImageSet, CLASS_NAMES};
use crate::tensor::Tensor;

pub const TOY_SIDE: usize = 32;

/// One image set with `counts[k]` samples of class k. Class k lights up
/// quadrant k (row-major quadrant order) at ~200 over a ~40 background, with
/// uniform per-pixel noise of ±25 and a per-image brightness jitter.
pub fn generate_toy_set(counts: &[usize; 4], seed: u64) -> LabeledImageSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images = Vec::new();
    let mut labels = Vec::new();
    let half = TOY_SIDE / 2;
    for (class, &count) in counts.iter().enumerate() {
        for _ in 0..count {
            let jitter: f32 = rng.random_range(-15.0..15.0);
            let mut data = Vec::with_capacity(TOY_SIDE * TOY_SIDE * 3);
            for y in 0..TOY_SIDE {
                for x in 0..TOY_SIDE {
                    let quadrant = usize::from(y >= half) * 2 + usize::from(x >= half);
                    let base = if quadrant == class { 200.0 } else { 40.0 };
                    for _ in 0..3 {
                        let noise: f32 = rng.random_range(-25.0..25.0);
                        data.push((base + jitter + noise).clamp(0.0, 255.0));
                    }
                }
            }
            images.push(Tensor::new(&[TOY_SIDE, TOY_SIDE, 3], data).expect("fixed dims"));
            labels.push(class);
        }
    }
    let n = labels.len();
    LabeledImageSet {
        images,
        labels,
        class_names: CLASS_NAMES.iter().map(|s| s.to_string()).collect(),
        synthetic: vec![false; n],
    }
}
