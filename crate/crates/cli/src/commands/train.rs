//! `brainnet train`: fit a model on a prepared cache and write checkpoints.

use std::path::PathBuf;

use clap::Args;

use brainnet::archive::WeightArchive;
use brainnet::data::{smote_dataset, Dataset, Scenario, SmoteConfig, SmoteOrder, SplitSpec};
use brainnet::model::{build_by_name, import_pretrained_layer, kaiming_init};
use brainnet::train::{fit, save_checkpoint, TrainConfig, TrainState};
use brainnet::train::checkpoint::load_checkpoint;
use brainnet::{Error, Result};

use crate::config::{group_thousands, DatasetMeta, RunConfig};

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Model name (see `brainnet inspect`)
    #[arg(long)]
    pub model: String,

    /// dataset.warc written by `brainnet prepare`
    #[arg(long)]
    pub data_cache: PathBuf,

    /// Output directory for the checkpoint, history.csv, and config.json
    #[arg(long)]
    pub out: PathBuf,

    /// JSON run configuration; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub epochs: Option<usize>,

    #[arg(long)]
    pub batch_size: Option<usize>,

    #[arg(long)]
    pub learning_rate: Option<f32>,

    /// Truncate the train and validation splits (smoke runs)
    #[arg(long)]
    pub limit: Option<usize>,

    /// Continue from an existing checkpoint instead of initializing fresh
    #[arg(long)]
    pub resume: Option<PathBuf>,

    /// Weight archive holding block2_conv1/{w,b} to import into conv2
    #[arg(long)]
    pub import_vgg19: Option<PathBuf>,

    /// Substitute the scaled-down variant of the chosen model
    #[arg(long)]
    pub toy: bool,
}

fn toy_name(name: &str) -> &str {
    match name {
        "ir-brainnet" => "toy-ir",
        "modified-demnet" => "toy-demnet",
        other => other,
    }
}

pub fn run(args: &TrainArgs) -> Result<()> {
    let mut cfg = RunConfig::load_or_default(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(epochs) = args.epochs {
        cfg.epochs = epochs;
    }
    if let Some(batch) = args.batch_size {
        cfg.batch_size = batch;
    }
    if let Some(lr) = args.learning_rate {
        cfg.learning_rate = lr;
    }

    let meta = DatasetMeta::load(&args.data_cache)?;
    let scenario: Scenario = meta.scenario.parse()?;
    let order: SmoteOrder = meta.smote_order.parse()?;
    if order == SmoteOrder::AfterSplit && meta.synthetic > 0 {
        return Err(Error::Config(
            "cache already contains synthetic rows but its meta says after-split; \
             re-run prepare"
                .into(),
        ));
    }
    let ds = Dataset::load_cache(&args.data_cache, &meta.class_names)?;
    println!(
        "loaded {} samples from {} (histogram {:?})",
        ds.len(),
        args.data_cache.display(),
        ds.histogram()
    );

    let (mut train_split, mut val_split, test_split) =
        brainnet::data::split_dataset(&ds, &SplitSpec::new(cfg.seed))?;
    if scenario == Scenario::Smote && order == SmoteOrder::AfterSplit {
        train_split = smote_dataset(&train_split, &SmoteConfig { k_neighbors: 5, seed: cfg.seed })?;
        println!("oversampled the training split to {:?}", train_split.histogram());
    }
    if let Some(limit) = args.limit {
        let keep_train: Vec<usize> = (0..train_split.len().min(limit)).collect();
        let keep_val: Vec<usize> = (0..val_split.len().min(limit)).collect();
        train_split = train_split.subset(&keep_train)?;
        val_split = val_split.subset(&keep_val)?;
    }
    println!(
        "splits: train {} / val {} / test {}",
        train_split.len(),
        val_split.len(),
        test_split.len()
    );

    let model_name = if args.toy { toy_name(&args.model) } else { &args.model }.to_string();
    let train_cfg = TrainConfig {
        learning_rate: cfg.learning_rate,
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        shuffle_seed: cfg.seed,
        ..TrainConfig::default()
    };

    let (mut graph, mut state) = match &args.resume {
        Some(path) => {
            let (graph, state) = load_checkpoint(path, &train_cfg)?;
            println!("resumed {} at epoch {}", graph.name(), state.epoch);
            (graph, state)
        }
        None => {
            let mut graph = kaiming_init(build_by_name(&model_name)?, cfg.seed);
            if let Some(donor) = &args.import_vgg19 {
                let archive = WeightArchive::load(donor)?;
                let (with_import, count) =
                    import_pretrained_layer(graph, "conv2", &archive, "block2_conv1")?;
                graph = with_import;
                println!(
                    "{} values imported from block2_conv1 into conv2",
                    group_thousands(count as u64)
                );
            }
            let state = TrainState::new(&graph, &train_cfg);
            (graph, state)
        }
    };

    let [h, w, c] = graph.input_shape();
    if ds.x.shape()[1..] != [h, w, c] {
        return Err(Error::Config(format!(
            "cache samples are {:?} but {} expects {:?}; prepare a matching cache",
            &ds.x.shape()[1..],
            graph.name(),
            [h, w, c]
        )));
    }

    std::fs::create_dir_all(&args.out)?;
    let ckpt_path = args.out.join(format!("{}.ckpt", graph.name()));
    if state.epoch >= cfg.epochs {
        println!("checkpoint already has {} epochs; nothing to train", state.epoch);
    }
    let mut saved = false;
    while state.epoch < cfg.epochs {
        let stop_after = state.epoch + 1;
        let step_cfg = TrainConfig { epochs: stop_after, ..train_cfg };
        fit(&mut graph, &mut state, &train_split, &val_split, &step_cfg)?;
        let record = state.history.epochs.last().expect("epoch just recorded");
        println!(
            "epoch {}/{}: train_loss={:.4} train_acc={:.4} val_loss={:.4} val_acc={:.4} lr={:.2e}",
            record.epoch,
            cfg.epochs,
            record.train_loss,
            record.train_acc,
            record.val_loss,
            record.val_acc,
            record.lr
        );
        save_checkpoint(&ckpt_path, &graph, &state)?;
        saved = true;
    }
    if !saved {
        save_checkpoint(&ckpt_path, &graph, &state)?;
    }

    std::fs::write(args.out.join("history.csv"), state.history.to_csv())?;
    cfg.echo(&args.out)?;
    println!("wrote {}", ckpt_path.display());
    Ok(())
}
