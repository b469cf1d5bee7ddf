//! Evaluation protocol: stratified folds, metrics, and the end-to-end
//! pipeline driving detection, replay, and cross-validation.

pub mod folds;
pub mod metrics;
pub mod pipeline;

pub use folds::{split_folds, FoldPlan, FoldSplit};
pub use metrics::{adjusted_rand_index, evaluate, MetricsReport};
pub use pipeline::{
    binned_f1_report, binned_rows_to_csv, cross_validate, cross_validate_plan,
    cross_validate_with, factor_samples, pooled_binned_f1, CvReport, Pipeline, PipelineSettings,
    ReplayPoint,
};
