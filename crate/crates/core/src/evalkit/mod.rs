//! Train/test protocol, metrics, factor analyses and report formatting.

mod analysis;
mod metrics;
mod protocol;
mod report;

use thiserror::Error;

pub use analysis::{
    author_correlations, correlation_table, igr_table, label_correlations, response_curve, response_curves,
    response_curves_tsv, wilson_interval, CorrelationRow, IgrRow, ResponseCurve, ResponsePoint,
};
pub use metrics::{
    auc, average_precision, classification_metrics, harmonic_mean, precision_at, random_expectation, ranking_metrics,
    regression_metrics, ClassificationMetrics, Confusion, RankingMetrics, RegressionMetrics,
};
pub use protocol::{
    default_groups, evaluate_scores, jackknife, random_baseline, run_protocol, run_protocol_with_seeds, split_half,
    split_indices, EvalReport, JackknifeReport, JackknifeRow, MetricSummary, ProtocolConfig, RunMetrics, Summary,
};
pub use report::{align, correlation_text, eval_table, igr_text, jackknife_table};

use crate::learners::LearnerError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("need at least 2 examples, got {0}")]
    TooFew(usize),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("undefined metric: {0}")]
    Undefined(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("run {run} failed: {source}")]
    Run { run: usize, source: LearnerError },
}
