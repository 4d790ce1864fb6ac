//! `brainnet evaluate`: score checkpoints on the held-out test split, build
//! the probability-averaging ensemble, and compare members pairwise.

use std::path::PathBuf;

use clap::Args;

use brainnet::data::{Dataset, SplitSpec};
use brainnet::eval::{
    ensemble_average, wilcoxon_signed_rank, CostSummary, EvaluationReport, ModelComparison,
};
use brainnet::model::{ensemble_flops, flop_count, CostConvention};
use brainnet::tensor::Tensor;
use brainnet::train::{load_checkpoint, TrainConfig};
use brainnet::{Error, Result};

use crate::config::{DatasetMeta, RunConfig};

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// dataset.warc written by `brainnet prepare`
    #[arg(long)]
    pub data_cache: PathBuf,

    /// Checkpoint to score; repeat the flag to evaluate several models and
    /// their ensemble
    #[arg(long = "checkpoint", required = true)]
    pub checkpoints: Vec<PathBuf>,

    /// Output directory for reports and config.json
    #[arg(long)]
    pub out: PathBuf,

    /// JSON run configuration; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// macs-x1 | macs-x2 | macs-x4
    #[arg(long)]
    pub flops_convention: Option<String>,

    #[arg(long)]
    pub batch_size: Option<usize>,
}

/// What the paired significance test actually pairs.
const PAIRING: &str = "per-sample true-class probability";

pub fn run(args: &EvaluateArgs) -> Result<()> {
    let mut cfg = RunConfig::load_or_default(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(convention) = &args.flops_convention {
        cfg.flops_convention = convention.clone();
    }
    if let Some(batch) = args.batch_size {
        cfg.batch_size = batch;
    }
    let convention: CostConvention = cfg.flops_convention.parse()?;

    let meta = DatasetMeta::load(&args.data_cache)?;
    let ds = Dataset::load_cache(&args.data_cache, &meta.class_names)?;
    let (_, _, test) = brainnet::data::split_dataset(&ds, &SplitSpec::new(cfg.seed))?;
    println!(
        "test split: {} samples, histogram {:?}",
        test.len(),
        test.histogram()
    );

    std::fs::create_dir_all(&args.out)?;
    let mut member_probs: Vec<Tensor> = Vec::new();
    let mut member_names: Vec<String> = Vec::new();
    let mut member_costs = Vec::new();
    let mut true_class_probs: Vec<Vec<f64>> = Vec::new();
    for path in &args.checkpoints {
        let (graph, _) = load_checkpoint(path, &TrainConfig::default())?;
        if graph.num_classes() != meta.class_names.len() {
            return Err(Error::Config(format!(
                "{} predicts {} classes but the cache has {}",
                graph.name(),
                graph.num_classes(),
                meta.class_names.len()
            )));
        }
        let probs = graph.predict_batched(&test.x, cfg.batch_size)?;
        let mut stem = graph.name().to_string();
        let copies = member_names.iter().filter(|n| **n == stem).count();
        if copies > 0 {
            stem = format!("{stem}-{}", copies + 1);
        }
        true_class_probs.push(
            test.labels
                .iter()
                .enumerate()
                .map(|(i, &l)| probs.at(&[i, l]) as f64)
                .collect(),
        );
        member_costs.push(flop_count(&graph, convention));
        member_names.push(stem);
        member_probs.push(probs);
    }

    let mut reports = Vec::new();
    for ((name, probs), cost) in member_names.iter().zip(&member_probs).zip(&member_costs) {
        reports.push(EvaluationReport::from_predictions(
            name,
            &meta.class_names,
            probs,
            &test.labels,
            Some(CostSummary::from(cost)),
        )?);
    }

    if member_probs.len() >= 2 {
        let avg = ensemble_average(&member_probs)?;
        let cost_refs: Vec<&_> = member_costs.iter().collect();
        let ensemble_cost = CostSummary {
            total_params: member_costs.iter().map(|c| c.total_params).sum(),
            trainable_params: member_costs.iter().map(|c| c.trainable_params).sum(),
            flops: ensemble_flops(&cost_refs, meta.class_names.len()),
            flops_convention: convention.name().to_string(),
            memory_bytes: member_costs.iter().map(|c| c.memory_bytes).sum(),
        };
        reports.push(EvaluationReport::from_predictions(
            "ensemble",
            &meta.class_names,
            &avg,
            &test.labels,
            Some(ensemble_cost),
        )?);
    }

    for report in &reports {
        brainnet::eval::write_report(&args.out, report)?;
        println!(
            "{:<18} accuracy={:.4} macro_f1={:.4} auc={:.4}",
            report.model, report.metrics.accuracy, report.metrics.macro_f1, report.roc.auc
        );
    }

    if member_probs.len() >= 2 {
        match wilcoxon_signed_rank(&true_class_probs[0], &true_class_probs[1]) {
            Ok(result) => {
                let row =
                    ModelComparison::new(&member_names[0], &member_names[1], PAIRING, &result);
                brainnet::eval::write_json(&args.out.join("comparison.json"), &row)?;
                println!(
                    "wilcoxon {} vs {}: W={:.1} p={:.4} (n={})",
                    member_names[0],
                    member_names[1],
                    result.statistic,
                    result.p_value,
                    result.n_effective
                );
            }
            Err(Error::DegenerateTest(reason)) => {
                eprintln!("warning: significance test degenerate: {reason}");
            }
            Err(other) => return Err(other),
        }
    }

    cfg.echo(&args.out)?;
    Ok(())
}
