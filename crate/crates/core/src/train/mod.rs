//! Mini-batch training: shuffled epochs, Adam updates, plateau schedule,
//! per-epoch history, and resumable state.

pub mod adam;
pub mod checkpoint;
pub mod plateau;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::ModelGraph;
use crate::ops::{cross_entropy, softmax_cross_entropy};

pub use adam::{adam_step, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use plateau::{PlateauScheduler, LR_FLOOR};

#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub learning_rate: f32,
    pub beta1: f32,
    pub beta2: f32,
    pub epsilon: f32,
    pub epochs: usize,
    pub batch_size: usize,
    pub plateau_patience: usize,
    pub plateau_factor: f32,
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
            epochs: 50,
            batch_size: 32,
            plateau_patience: 3,
            plateau_factor: 0.1,
            shuffle_seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 || self.epsilon <= 0.0 {
            return Err(Error::Config("learning_rate and epsilon must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::Config("beta1 and beta2 must lie in [0,1)".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if self.plateau_patience == 0 {
            return Err(Error::Config("plateau_patience must be at least 1".into()));
        }
        if !(self.plateau_factor > 0.0 && self.plateau_factor < 1.0) {
            return Err(Error::Config("plateau_factor must be in (0,1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f32,
    pub train_acc: f32,
    pub val_loss: f32,
    pub val_acc: f32,
    pub lr: f32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
}

impl History {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,train_acc,val_loss,val_acc,lr\n");
        for e in &self.epochs {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.epoch, e.train_loss, e.train_acc, e.val_loss, e.val_acc, e.lr
            ));
        }
        out
    }
}

/// Everything needed to resume a run exactly: optimizer moments, completed
/// epoch count, current learning rate, plateau bookkeeping, and the history
/// so far.
#[derive(Debug, Clone)]
pub struct TrainState {
    pub adam: AdamState,
    pub epoch: usize,
    pub lr: f32,
    pub plateau: PlateauScheduler,
    pub history: History,
}

impl TrainState {
    pub fn new(g: &ModelGraph, cfg: &TrainConfig) -> Self {
        Self {
            adam: AdamState::new(g),
            epoch: 0,
            lr: cfg.learning_rate,
            plateau: PlateauScheduler::new(cfg.plateau_patience, cfg.plateau_factor),
            history: History::default(),
        }
    }
}

fn argmax_row(row: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Infer-mode loss and accuracy over a dataset, batched.
pub fn evaluate_split(g: &ModelGraph, ds: &Dataset, batch: usize) -> Result<(f32, f32)> {
    if ds.is_empty() {
        return Err(Error::Evaluation("cannot evaluate an empty split".into()));
    }
    let probs = g.predict_batched(&ds.x, batch)?;
    let loss = cross_entropy(&probs, &ds.labels)?;
    let c = probs.dim(1);
    let correct = probs
        .data()
        .chunks_exact(c)
        .zip(&ds.labels)
        .filter(|(row, &label)| argmax_row(row) == label)
        .count();
    Ok((loss, correct as f32 / ds.len() as f32))
}

/// Epoch-`e` batch order: a dedicated generator keyed off the shuffle seed
/// and the epoch index, so resuming at any epoch reproduces the original
/// order without serializing generator state.
fn epoch_order(n: usize, shuffle_seed: u64, epoch: usize) -> Vec<usize> {
    let key = shuffle_seed ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    idx
}

/// Trains in place from `state.epoch` up to `cfg.epochs`. Every epoch:
/// shuffle, run mini-batches (final partial batch included) with train-mode
/// forward, fused softmax/cross-entropy backward, and an Adam step; then
/// score the validation split in infer mode, record history, and let the
/// plateau schedule adjust the rate for the next epoch.
pub fn fit(
    g: &mut ModelGraph,
    state: &mut TrainState,
    train: &Dataset,
    val: &Dataset,
    cfg: &TrainConfig,
) -> Result<()> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Training("training split is empty".into()));
    }
    while state.epoch < cfg.epochs {
        let epoch = state.epoch;
        let order = epoch_order(train.len(), cfg.shuffle_seed, epoch);
        let mut loss_sum = 0f64;
        let mut correct = 0usize;
        for (batch_idx, batch) in order.chunks(cfg.batch_size).enumerate() {
            let x = train.x.gather_rows(batch)?;
            let labels: Vec<usize> = batch.iter().map(|&i| train.labels[i]).collect();
            let pass = g.forward_train(&x)?;
            let (loss, probs, dlogits) = softmax_cross_entropy(&pass.logits, &labels)?;
            if !loss.is_finite() {
                return Err(Error::Training(format!(
                    "non-finite loss at epoch {} batch {batch_idx}",
                    epoch + 1
                )));
            }
            let grads = g.backward(&pass, &dlogits)?;
            adam_step(g, &grads, &mut state.adam, state.lr, cfg.beta1, cfg.beta2, cfg.epsilon)?;
            loss_sum += loss as f64 * batch.len() as f64;
            let c = probs.dim(1);
            correct += probs
                .data()
                .chunks_exact(c)
                .zip(&labels)
                .filter(|(row, &label)| argmax_row(row) == label)
                .count();
        }
        let train_loss = (loss_sum / train.len() as f64) as f32;
        let train_acc = correct as f32 / train.len() as f32;
        let (val_loss, val_acc) = evaluate_split(g, val, cfg.batch_size)?;
        state.history.epochs.push(EpochRecord {
            epoch: epoch + 1,
            train_loss,
            train_acc,
            val_loss,
            val_acc,
            lr: state.lr,
        });
        state.lr = state.plateau.observe(val_loss, state.lr);
        state.epoch += 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{normalize_and_encode, split_dataset, toy::generate_toy_set, SplitSpec};
    use crate::model::init::kaiming_init;
    use crate::model::zoo::build_toy_ir;

    fn toy_splits(per_class: usize, seed: u64) -> (Dataset, Dataset, Dataset) {
        let set = generate_toy_set(&[per_class; 4], seed);
        let ds = normalize_and_encode(&set).unwrap();
        split_dataset(&ds, &SplitSpec::new(seed)).unwrap()
    }

    fn small_cfg(epochs: usize) -> TrainConfig {
        TrainConfig {
            learning_rate: 1e-3,
            epochs,
            batch_size: 16,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn single_partial_batch_takes_one_step() {
        let (train, val, _) = toy_splits(8, 3);
        let mut g = kaiming_init(build_toy_ir().unwrap(), 0);
        let cfg = TrainConfig { epochs: 1, batch_size: 64, ..small_cfg(1) };
        let mut state = TrainState::new(&g, &cfg);
        fit(&mut g, &mut state, &train, &val, &cfg).unwrap();
        assert_eq!(state.adam.step_count(), 1);
        assert_eq!(state.history.epochs.len(), 1);
    }

    #[test]
    fn history_has_one_row_per_epoch_and_lr_never_increases() {
        let (train, val, _) = toy_splits(10, 4);
        let mut g = kaiming_init(build_toy_ir().unwrap(), 1);
        let cfg = small_cfg(4);
        let mut state = TrainState::new(&g, &cfg);
        fit(&mut g, &mut state, &train, &val, &cfg).unwrap();
        assert_eq!(state.history.epochs.len(), 4);
        for pair in state.history.epochs.windows(2) {
            assert!(pair[1].lr <= pair[0].lr);
        }
        for (i, e) in state.history.epochs.iter().enumerate() {
            assert_eq!(e.epoch, i + 1);
        }
    }

    #[test]
    fn fixed_seeds_reproduce_bitwise() {
        let run = || {
            let (train, val, _) = toy_splits(8, 5);
            let mut g = kaiming_init(build_toy_ir().unwrap(), 2);
            let cfg = small_cfg(2);
            let mut state = TrainState::new(&g, &cfg);
            fit(&mut g, &mut state, &train, &val, &cfg).unwrap();
            (
                g.param("dense2/w").unwrap().data().to_vec(),
                state.history.epochs.clone(),
            )
        };
        let a = run();
        let b = run();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn repeated_batch_loss_decreases() {
        let set = generate_toy_set(&[8; 4], 6);
        let ds = normalize_and_encode(&set).unwrap();
        let mut g = kaiming_init(build_toy_ir().unwrap(), 3);
        let cfg = small_cfg(1);
        let mut state = TrainState::new(&g, &cfg);
        let mut losses = Vec::new();
        for _ in 0..22 {
            let pass = g.forward_train(&ds.x).unwrap();
            let (loss, _, dlogits) = softmax_cross_entropy(&pass.logits, &ds.labels).unwrap();
            let grads = g.backward(&pass, &dlogits).unwrap();
            adam_step(&mut g, &grads, &mut state.adam, 1e-3, 0.9, 0.999, 1e-7).unwrap();
            losses.push(loss);
        }
        for pair in losses.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-6, "uptick: {} -> {}", pair[0], pair[1]);
        }
        assert!(losses.last().unwrap() < &losses[0]);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let history = History {
            epochs: vec![EpochRecord {
                epoch: 1,
                train_loss: 1.25,
                train_acc: 0.5,
                val_loss: 1.5,
                val_acc: 0.25,
                lr: 1e-4,
            }],
        };
        let csv = history.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "epoch,train_loss,train_acc,val_loss,val_acc,lr");
        assert_eq!(lines.next().unwrap(), "1,1.25,0.5,1.5,0.25,0.0001");
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = TrainConfig { batch_size: 0, ..TrainConfig::default() };
        assert!(bad.validate().is_err());
        let bad = TrainConfig { plateau_factor: 1.5, ..TrainConfig::default() };
        assert!(bad.validate().is_err());
        let bad = TrainConfig { learning_rate: 0.0, ..TrainConfig::default() };
        assert!(bad.validate().is_err());
    }
}
