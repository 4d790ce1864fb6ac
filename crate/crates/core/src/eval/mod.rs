//! Scoring trained models: confusion matrices, derived metrics, ROC curves,
//! probability-averaging ensembles, and paired significance testing.

pub mod confusion;
pub mod ensemble;
pub mod report;
pub mod roc;
pub mod wilcoxon;

pub use confusion::{metrics, ClassMetrics, ConfusionMatrix, MetricsSummary};
pub use ensemble::{ensemble_average, predicted_labels};
pub use report::{
    write_json, write_report, CostSummary, EvaluationReport, ModelComparison,
};
pub use roc::{roc_auc, RocCurve, RocPoint};
pub use wilcoxon::{
    wilcoxon_signed_rank, WilcoxonMethod, WilcoxonResult, EXACT_LIMIT,
};
