//! Checkpoints in WeightArchive format: model identity, every parameter
//! (moving statistics included), Adam moments, schedule state, and history.
//!
//! Entry layout:
//!   model/<name>            [1] marker carrying the architecture name
//!   param/<p>               parameter tensors
//!   adam/m/<p>, adam/v/<p>  optimizer moments
//!   meta/state              [5]: step count, completed epochs, lr,
//!                                plateau best, epochs since best
//!   history/<column>        [E] per-epoch series, present when E ≥ 1

use std::fs;
use std::path::Path;

use indexmap::IndexMap;

use crate::archive::WeightArchive;
use crate::error::{Error, Result};
use crate::model::zoo::build_by_name;
use crate::model::ModelGraph;
use crate::tensor::Tensor;
use crate::train::{AdamState, EpochRecord, History, PlateauScheduler, TrainConfig, TrainState};

const HISTORY_COLUMNS: [&str; 5] = ["train_loss", "train_acc", "val_loss", "val_acc", "lr"];

fn history_column(history: &History, column: &str) -> Vec<f32> {
    history
        .epochs
        .iter()
        .map(|e| match column {
            "train_loss" => e.train_loss,
            "train_acc" => e.train_acc,
            "val_loss" => e.val_loss,
            "val_acc" => e.val_acc,
            "lr" => e.lr,
            _ => unreachable!("fixed column set"),
        })
        .collect()
}

pub fn save_checkpoint(path: &Path, g: &ModelGraph, state: &TrainState) -> Result<()> {
    let mut archive = WeightArchive::new();
    archive.insert(&format!("model/{}", g.name()), Tensor::new(&[1], vec![1.0])?)?;
    for (name, tensor) in g.params() {
        archive.insert(&format!("param/{name}"), tensor.clone())?;
    }
    for (name, m, v) in state.adam.moments() {
        archive.insert(&format!("adam/m/{name}"), m.clone())?;
        archive.insert(&format!("adam/v/{name}"), v.clone())?;
    }
    archive.insert(
        "meta/state",
        Tensor::new(
            &[5],
            vec![
                state.adam.step_count() as f32,
                state.epoch as f32,
                state.lr,
                state.plateau.best,
                state.plateau.since_best as f32,
            ],
        )?,
    )?;
    for column in HISTORY_COLUMNS {
        let values = history_column(&state.history, column);
        if !values.is_empty() {
            let len = values.len();
            archive.insert(&format!("history/{column}"), Tensor::new(&[len], values)?)?;
        }
    }
    // write-then-rename keeps a crash from leaving a truncated checkpoint
    let tmp = path.with_extension("tmp");
    archive.save(&tmp)?;
    fs::rename(&tmp, path)
        .map_err(|e| Error::Checkpoint(format!("cannot move checkpoint into place: {e}")))?;
    Ok(())
}

/// Restores the graph named inside the checkpoint along with the full
/// training state. `cfg` supplies the plateau patience/factor, which are
/// configuration rather than state.
pub fn load_checkpoint(path: &Path, cfg: &TrainConfig) -> Result<(ModelGraph, TrainState)> {
    let archive =
        WeightArchive::load(path).map_err(|e| Error::Checkpoint(format!("{path:?}: {e}")))?;
    let model_name = archive
        .names()
        .find_map(|n| n.strip_prefix("model/"))
        .ok_or_else(|| Error::Checkpoint("no model/<name> entry".into()))?
        .to_string();
    let mut g = build_by_name(&model_name)?;

    for name in g.params().map(|(n, _)| n.to_string()).collect::<Vec<_>>() {
        let entry = archive
            .get(&format!("param/{name}"))
            .ok_or_else(|| Error::Checkpoint(format!("missing parameter {name:?}")))?;
        g.set_param(&name, entry.clone())
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
    }

    let mut m = IndexMap::new();
    let mut v = IndexMap::new();
    for name in g.trainable_param_names() {
        for (map, prefix) in [(&mut m, "adam/m/"), (&mut v, "adam/v/")] {
            let entry = archive
                .get(&format!("{prefix}{name}"))
                .ok_or_else(|| Error::Checkpoint(format!("missing {prefix}{name}")))?;
            map.insert(name.clone(), entry.clone());
        }
    }

    let meta = archive.require("meta/state").map_err(|e| Error::Checkpoint(e.to_string()))?;
    if meta.numel() != 5 {
        return Err(Error::Checkpoint(format!("meta/state has {} values, expected 5", meta.numel())));
    }
    let md = meta.data();
    let adam = AdamState::restore(&g, m, v, md[0] as u64)?;
    let mut plateau = PlateauScheduler::new(cfg.plateau_patience, cfg.plateau_factor);
    plateau.best = md[3];
    plateau.since_best = md[4] as usize;

    let mut history = History::default();
    if let Some(first) = archive.get("history/train_loss") {
        let epochs = first.numel();
        let mut columns = Vec::new();
        for column in HISTORY_COLUMNS {
            let entry = archive
                .require(&format!("history/{column}"))
                .map_err(|e| Error::Checkpoint(e.to_string()))?;
            if entry.numel() != epochs {
                return Err(Error::Checkpoint("history columns disagree in length".into()));
            }
            columns.push(entry.data().to_vec());
        }
        for e in 0..epochs {
            history.epochs.push(EpochRecord {
                epoch: e + 1,
                train_loss: columns[0][e],
                train_acc: columns[1][e],
                val_loss: columns[2][e],
                val_acc: columns[3][e],
                lr: columns[4][e],
            });
        }
    }

    let state = TrainState {
        adam,
        epoch: md[1] as usize,
        lr: md[2],
        plateau,
        history,
    };
    Ok((g, state))
}
