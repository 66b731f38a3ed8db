//! Stratified cross-validation, oversampling, metrics and the detection and
//! prediction experiment protocols.

mod experiment;
mod folds;
mod metrics;
mod report;

pub use experiment::{
    run_detection_experiment, run_detection_folds, run_prediction_experiment, DetectionConfig,
    FoldArtifacts, PredictionConfig,
};
pub use folds::{oversample_minority, oversample_minority_with, stratified_kfold, FoldPlan, DEFAULT_FOLDS};
pub use metrics::{metrics, Metrics};
pub use report::{EvalReport, EvalRow, FoldMetrics};
