//! `brainnet prepare`: decode, resize, normalize, and optionally oversample a
//! dataset into a cache archive plus its meta sidecar.

use std::path::PathBuf;

use clap::Args;

use brainnet::data::toy::generate_toy_set;
use brainnet::data::{
    ingest_directory, normalize_and_encode, resize_set, smote_dataset, Scenario, SmoteConfig,
    SmoteOrder,
};
use brainnet::model::INPUT_SHAPE;
use brainnet::Result;

use crate::config::{DatasetMeta, RunConfig};

/// Imbalanced enough that oversampling visibly changes the histogram.
const TOY_COUNTS: [usize; 4] = [64, 32, 128, 96];

#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// Directory with one subdirectory of images per class (PPM/PGM built in,
    /// JPEG behind the core's `jpeg` feature)
    #[arg(long, required_unless_present = "toy")]
    pub data: Option<PathBuf>,

    /// Output directory for dataset.warc, dataset.meta.json, and config.json
    #[arg(long)]
    pub out: PathBuf,

    /// JSON run configuration; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// smote | no-smote
    #[arg(long)]
    pub scenario: Option<String>,

    /// paper (oversample before splitting) | after-split
    #[arg(long)]
    pub smote_order: Option<String>,

    /// Generate the built-in quadrant fixture instead of reading --data
    #[arg(long)]
    pub toy: bool,
}

pub fn run(args: &PrepareArgs) -> Result<()> {
    let mut cfg = RunConfig::load_or_default(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(scenario) = &args.scenario {
        cfg.scenario = scenario.clone();
    }
    if let Some(order) = &args.smote_order {
        cfg.smote_order = order.clone();
    }
    let scenario: Scenario = cfg.scenario.parse()?;
    let order: SmoteOrder = cfg.smote_order.parse()?;

    let set = if args.toy {
        println!(
            "generating toy fixture: {} images across {} classes",
            TOY_COUNTS.iter().sum::<usize>(),
            TOY_COUNTS.len()
        );
        generate_toy_set(&TOY_COUNTS, cfg.seed)
    } else {
        let dir = args.data.as_ref().expect("clap enforces --data without --toy");
        let outcome = ingest_directory(dir)?;
        for (path, reason) in &outcome.failures {
            eprintln!("warning: skipped {}: {reason}", path.display());
        }
        let [h, w, _] = INPUT_SHAPE;
        println!(
            "decoded {} images in {} classes; resizing to {h}x{w}",
            outcome.set.len(),
            outcome.set.class_names.len()
        );
        resize_set(&outcome.set, h, w)?
    };

    let mut ds = normalize_and_encode(&set)?;
    let before = ds.histogram();
    println!("class histogram: {:?} -> {before:?}", set.class_names);

    if scenario == Scenario::Smote && order == SmoteOrder::Paper {
        ds = smote_dataset(&ds, &SmoteConfig { k_neighbors: 5, seed: cfg.seed })?;
        println!(
            "oversampled to {:?} ({} synthetic rows)",
            ds.histogram(),
            ds.synthetic.iter().filter(|&&s| s).count()
        );
    }

    std::fs::create_dir_all(&args.out)?;
    let cache = args.out.join("dataset.warc");
    ds.save_cache(&cache)?;
    let meta = DatasetMeta {
        class_names: ds.class_names.clone(),
        scenario: cfg.scenario.clone(),
        smote_order: cfg.smote_order.clone(),
        seed: cfg.seed,
        histogram: ds.histogram(),
        synthetic: ds.synthetic.iter().filter(|&&s| s).count(),
    };
    meta.save(&cache)?;
    cfg.echo(&args.out)?;
    println!("wrote {} ({} samples)", cache.display(), ds.len());
    Ok(())
}
