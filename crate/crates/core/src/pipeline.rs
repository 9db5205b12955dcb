//! Glue from a corpus to labeled datasets.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::collabnet::PageRankConfig;
use crate::corpus::{AuthorIdx, CorpusSnapshot, CorpusStore, Year};
use crate::factorlab::{
    author_features, build_author_dataset, build_dataset, observed_future_h, Dataset, DatasetSpec, FactorError,
    FutureHSource, SnapshotContext, AUTHOR_FEATURES,
};
use crate::learners::{fit_linear_regression, predict_linear, LearnerError, TrainedModel};
use crate::scholarmetrics::author_profile;
use crate::topicmodel::{fit_snapshot_topics, LdaConfig, TopicError, TrainingScope};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error(transparent)]
    Topic(#[from] TopicError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error("{0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct PipelineConfig {
    pub lda: LdaConfig,
    pub scope: TrainingScope,
    pub pagerank: PageRankConfig,
}

/// Fits topics on the snapshot at `t` and builds every shared table.
pub fn build_context(store: &Arc<CorpusStore>, t: Year, cfg: &PipelineConfig) -> Result<SnapshotContext, PipelineError> {
    let snapshot = CorpusSnapshot::build(store.clone(), t);
    let (model, doc_topics) = fit_snapshot_topics(&snapshot, &cfg.lda, cfg.scope)?;
    Ok(SnapshotContext::build(store.clone(), t, model, doc_topics, &cfg.pagerank)?)
}

/// Future h-index regressor trained on authors at `t` with targets at
/// `t + delta_t`.
pub fn train_hindex_regressor(
    store: &Arc<CorpusStore>,
    t: Year,
    delta_t: u32,
    min_h: u32,
) -> Result<TrainedModel, PipelineError> {
    let ds = build_author_dataset(store, t, delta_t, min_h)?;
    let names: Vec<String> = AUTHOR_FEATURES.iter().map(|s| s.to_string()).collect();
    Ok(fit_linear_regression(&ds.matrix(), &ds.targets(), &names)?)
}

/// Regressor prediction for one author from their profile at the snapshot.
pub fn predict_author_h(model: &TrainedModel, snapshot: &CorpusSnapshot, author: AuthorIdx) -> Result<f64, PipelineError> {
    let profile = author_profile(snapshot, author).map_err(|e| PipelineError::Config(e.to_string()))?;
    let p = predict_linear(model, &author_features(&profile), f64::from(profile.h_index))?;
    Ok(p.value)
}

/// Builds the dataset for `spec`, labeling against observed future h-indices
/// or against `regressor` predictions.
pub fn labeled_dataset(
    ctx: &SnapshotContext,
    spec: &DatasetSpec,
    regressor: Option<&TrainedModel>,
) -> Result<Dataset, PipelineError> {
    match spec.future_h_source {
        FutureHSource::Observed => {
            let future = observed_future_h(ctx.snapshot.store_arc(), spec)?;
            Ok(build_dataset(ctx, spec, |a| f64::from(future.author_h(a)))?)
        }
        FutureHSource::Predicted => {
            let model = regressor
                .ok_or_else(|| PipelineError::Config("predicted future h needs a trained regressor".into()))?;
            model.check_schema(&AUTHOR_FEATURES)?;
            let snap = &ctx.snapshot;
            Ok(build_dataset(ctx, spec, |a| {
                predict_author_h(model, snap, a).unwrap_or_else(|_| f64::from(snap.author_h(a)))
            })?)
        }
    }
}
