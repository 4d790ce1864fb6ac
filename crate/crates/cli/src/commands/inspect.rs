//! `brainnet inspect`: per-layer parameter, FLOP, and memory accounting.

use clap::Args;

use brainnet::model::{build_by_name, ensemble_flops, flop_count, CostConvention};
use brainnet::{Error, Result};

use crate::config::group_thousands;

pub const MODEL_NAMES: [&str; 4] = ["ir-brainnet", "modified-demnet", "toy-ir", "toy-demnet"];

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Model name, or "ensemble" for the two full models combined
    #[arg(long)]
    pub model: String,

    /// macs-x1 | macs-x2 | macs-x4
    #[arg(long, default_value = "macs-x2")]
    pub flops_convention: String,

    /// Emit the full report as JSON instead of a table
    #[arg(long)]
    pub json: bool,
}

pub fn run(args: &InspectArgs) -> Result<()> {
    let convention: CostConvention = args.flops_convention.parse()?;

    if args.model == "ensemble" {
        let ir = flop_count(&build_by_name("ir-brainnet")?, convention);
        let md = flop_count(&build_by_name("modified-demnet")?, convention);
        let flops = ensemble_flops(&[&ir, &md], 4);
        let params = ir.total_params + md.total_params;
        let memory = ir.memory_bytes + md.memory_bytes;
        if args.json {
            let value = serde_json::json!({
                "model": "ensemble",
                "members": [ir, md],
                "convention": convention.name(),
                "total_params": params,
                "flops": flops,
                "memory_bytes": memory,
            });
            println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
        } else {
            println!("ensemble of ir-brainnet + modified-demnet");
            println!("  params : {}", group_thousands(params as u64));
            println!("  flops  : {} ({convention})", group_thousands(flops));
            println!(
                "  memory : {} bytes ({:.2} MiB)",
                group_thousands(memory as u64),
                memory as f64 / (1024.0 * 1024.0)
            );
        }
        return Ok(());
    }

    let graph = build_by_name(&args.model).map_err(|_| {
        Error::Config(format!(
            "unknown model {:?}; available: {}, ensemble",
            args.model,
            MODEL_NAMES.join(", ")
        ))
    })?;
    let report = flop_count(&graph, convention);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
        return Ok(());
    }

    println!("{} (input {:?})", report.model, graph.input_shape());
    println!("{:<12} {:>18} {:>12} {:>16}", "layer", "output", "params", "flops");
    for layer in &report.per_layer {
        let dims = layer
            .output_dims
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join("x");
        println!(
            "{:<12} {:>18} {:>12} {:>16}",
            layer.name,
            dims,
            group_thousands(layer.params as u64),
            group_thousands(layer.flops)
        );
    }
    println!(
        "total: {} params ({} trainable), {} flops ({}), {} bytes ({:.2} MiB)",
        group_thousands(report.total_params as u64),
        group_thousands(report.trainable_params as u64),
        group_thousands(report.flops),
        convention,
        group_thousands(report.memory_bytes as u64),
        report.memory_bytes as f64 / (1024.0 * 1024.0)
    );
    Ok(())
}
