//! Serialization of evaluation results to JSON and CSV files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::confusion::{metrics, ConfusionMatrix, MetricsSummary};
use crate::eval::ensemble::predicted_labels;
use crate::eval::roc::{roc_auc, RocCurve};
use crate::eval::wilcoxon::{WilcoxonMethod, WilcoxonResult};
use crate::model::CostReport;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostSummary {
    pub total_params: usize,
    pub trainable_params: usize,
    pub flops: u64,
    pub flops_convention: String,
    pub memory_bytes: usize,
}

impl From<&CostReport> for CostSummary {
    fn from(report: &CostReport) -> Self {
        Self {
            total_params: report.total_params,
            trainable_params: report.trainable_params,
            flops: report.flops,
            flops_convention: report.convention.name().to_string(),
            memory_bytes: report.memory_bytes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub model: String,
    pub class_names: Vec<String>,
    pub num_samples: usize,
    pub metrics: MetricsSummary,
    pub confusion: Vec<Vec<usize>>,
    pub roc: RocCurve,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostSummary>,
}

impl EvaluationReport {
    /// Scores a `[N, C]` probability matrix against true labels and bundles
    /// the confusion matrix, derived metrics, and ROC curve.
    pub fn from_predictions(
        model: &str,
        class_names: &[String],
        probs: &Tensor,
        labels: &[usize],
        cost: Option<CostSummary>,
    ) -> Result<Self> {
        let num_classes = class_names.len();
        if probs.rank() != 2 || probs.dim(1) != num_classes {
            return Err(Error::Evaluation(format!(
                "predictions of shape {:?} do not match {} classes",
                probs.shape(),
                num_classes
            )));
        }
        let predicted = predicted_labels(probs)?;
        let cm = ConfusionMatrix::from_labels(labels, &predicted, num_classes)?;
        Ok(Self {
            model: model.to_string(),
            class_names: class_names.to_vec(),
            num_samples: labels.len(),
            metrics: metrics(&cm)?,
            confusion: cm.rows(),
            roc: roc_auc(probs, labels)?,
            cost,
        })
    }

    /// Per-class table plus macro and accuracy rows.
    pub fn metrics_csv(&self) -> String {
        let mut out = String::from("class,precision,recall,f1,support\n");
        for (name, m) in self.class_names.iter().zip(&self.metrics.per_class) {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6},{}\n",
                name, m.precision, m.recall, m.f1, m.support
            ));
        }
        out.push_str(&format!(
            "macro,{:.6},{:.6},{:.6},{}\n",
            self.metrics.macro_precision,
            self.metrics.macro_recall,
            self.metrics.macro_f1,
            self.num_samples
        ));
        out.push_str(&format!(
            "accuracy,{:.6},,,{}\n",
            self.metrics.accuracy, self.num_samples
        ));
        out
    }

    pub fn roc_csv(&self) -> String {
        let mut out = String::from("fpr,tpr,threshold\n");
        for p in &self.roc.points {
            out.push_str(&format!("{:.6},{:.6},{:.6}\n", p.fpr, p.tpr, p.threshold));
        }
        out
    }
}

/// One pairwise significance row, ready for JSON output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelComparison {
    pub model_a: String,
    pub model_b: String,
    /// What the paired observations are (e.g. per-sample correctness).
    pub pairing: String,
    pub n_effective: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub method: WilcoxonMethod,
}

impl ModelComparison {
    pub fn new(model_a: &str, model_b: &str, pairing: &str, result: &WilcoxonResult) -> Self {
        Self {
            model_a: model_a.to_string(),
            model_b: model_b.to_string(),
            pairing: pairing.to_string(),
            n_effective: result.n_effective,
            statistic: result.statistic,
            p_value: result.p_value,
            method: result.method,
        }
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Serializes any value as pretty JSON, atomically (temp file then rename).
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Evaluation(format!("could not serialize report: {e}")))?;
    body.push('\n');
    write_atomic(path, body.as_bytes())
}

/// Writes `<model>.report.json`, `<model>.metrics.csv`, and `<model>.roc.csv`
/// into `dir`, returning the paths. Repeated calls produce identical bytes.
pub fn write_report(dir: &Path, report: &EvaluationReport) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let stem = report.model.replace(['/', ' '], "-");
    let json_path = dir.join(format!("{stem}.report.json"));
    let metrics_path = dir.join(format!("{stem}.metrics.csv"));
    let roc_path = dir.join(format!("{stem}.roc.csv"));
    write_json(&json_path, report)?;
    write_atomic(&metrics_path, report.metrics_csv().as_bytes())?;
    write_atomic(&roc_path, report.roc_csv().as_bytes())?;
    Ok(vec![json_path, metrics_path, roc_path])
}
