//! Stratified cross-validation over the feature × LSA × context grid.

mod experiment;
mod folds;
mod metrics;
mod report;

pub use experiment::{
    evaluate_fold, fold_plan, quantize_fold, run_experiment, run_experiments, train_fold, training_answers,
    ExperimentConfig, FoldModel, FoldResult, MetricsReport, QuantizedFold, DEFAULT_CODEBOOK_SIZE, DEFAULT_FOLDS,
};
pub use folds::{stratified_kfold, FoldPlan};
pub use metrics::{compute_metrics, mean_rates, Confusion, Metrics, Rates};
pub use report::{emit_results, parse_results, results_csv, scatter_svg, ResultRow, RESULTS_HEADER};
