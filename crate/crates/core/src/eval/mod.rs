//! Stratified splitting, cross-validated grid search, metrics and the
//! per-algorithm comparison report.

mod grid;
mod metrics;
mod report;
mod split;

pub use grid::{grid_search, CellResult, GridResult};
pub use metrics::{compute_metrics, roc_auc, MetricSet};
pub use report::{evaluate_all, AlgorithmPlan, EvalOptions, EvaluationReport, ReportRow};
pub use split::{stratified_kfold, stratified_split, test_counts, FoldPlan, SplitPlan};
