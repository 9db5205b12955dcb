use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use hforecast::artifacts::{topics_version, ArtifactLayout, TopicsStamp, SPEC_KEY};
use hforecast::corpus::{load_cache, Year};
use hforecast::factorlab::{DatasetSpec, PaperSet, PrimaryMode, SnapshotContext, AUTHOR_FEATURES, EXISTING_FACTORS};
use hforecast::learners::{LearnerKind, TrainedModel};
use hforecast::topicmodel::{DocTopics, TopicModel};
use serde::Serialize;

/// Longest horizon the h-index endpoint accepts.
pub const MAX_HORIZON: u32 = 10;

#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: TrainedModel,
    pub version: String,
}

impl LoadedModel {
    pub fn new(model: TrainedModel) -> Self {
        let version = model.version_tag();
        LoadedModel { model, version }
    }
}

/// Paper classifier together with the dataset spec it was trained on.
#[derive(Debug, Clone)]
pub struct Classifier {
    pub model: LoadedModel,
    pub spec: DatasetSpec,
}

impl Classifier {
    /// The spec comes from the model's run config when present; `fallback`
    /// is used otherwise.
    pub fn new(model: TrainedModel, fallback: DatasetSpec) -> Result<Self, String> {
        if model.kind == LearnerKind::LinearRegression {
            return Err("paper model must be a classifier".into());
        }
        if model.feature_names.iter().any(|n| EXISTING_FACTORS.contains(&n.as_str())) {
            return Err("paper model must be trained on the new-paper set".into());
        }
        let spec = match model.run_config.as_ref().and_then(|c| c.get(SPEC_KEY)) {
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| format!("model spec: {e}"))?,
            None => fallback,
        };
        if spec.set != PaperSet::New {
            return Err("paper model must be trained on the new-paper set".into());
        }
        Ok(Classifier {
            model: LoadedModel::new(model),
            spec,
        })
    }
}

/// Immutable artifacts shared by every request. Parts that failed to load
/// are listed in `missing`.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub context: Option<Arc<SnapshotContext>>,
    pub topics_version: Option<String>,
    pub hindex: BTreeMap<u32, LoadedModel>,
    pub classifier: Option<Classifier>,
    pub missing: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelVersions {
    pub hindex: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paper: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topics: Option<String>,
}

/// What to load for serving.
#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub t: Year,
    pub delta_t: u32,
    pub learner: LearnerKind,
    pub mode: PrimaryMode,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            t: 2007,
            delta_t: 5,
            learner: LearnerKind::LogisticRegression,
            mode: PrimaryMode::MaxH,
        }
    }
}

impl Artifacts {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty() && self.context.is_some() && self.classifier.is_some() && !self.hindex.is_empty()
    }

    pub fn corpus_checksum(&self) -> Option<&str> {
        self.context.as_ref().map(|c| c.store().checksum())
    }

    pub fn model_versions(&self) -> ModelVersions {
        ModelVersions {
            hindex: self.hindex.iter().map(|(h, m)| (h.to_string(), m.version.clone())).collect(),
            paper: self.classifier.as_ref().map(|c| c.model.version.clone()),
            topics: self.topics_version.clone(),
        }
    }

    /// Loads whatever exists under `layout` for `cfg`. Never fails; absent or
    /// unreadable artifacts are recorded in `missing`.
    pub fn load(layout: &ArtifactLayout, cfg: &ServeConfig) -> Self {
        let mut a = Artifacts::default();
        let t = cfg.t;

        let store = match load_cache(&layout.corpus_cache(), None) {
            Ok(Some(s)) => Some(Arc::new(s)),
            Ok(None) => None,
            Err(e) => {
                a.missing.push(format!("corpus cache ({e})"));
                None
            }
        };
        let stamp: Option<TopicsStamp> = read_json(&layout.topics_config(t));
        let topics = match (TopicModel::load(&layout.topic_model(t)), DocTopics::load(&layout.doc_topics(t))) {
            (Ok(m), Ok(d)) => Some((m, d)),
            (Err(e), _) | (_, Err(e)) => {
                a.missing.push(format!("topic model for t = {t} ({e})"));
                None
            }
        };
        if let (Some(store), Some((model, docs))) = (store, topics) {
            let config = stamp.as_ref().map(|s| s.config.clone()).unwrap_or_default();
            if let Some(s) = &stamp {
                if s.corpus_checksum != store.checksum() {
                    a.missing.push("topic model was fit on a different corpus".into());
                }
            }
            if let Ok(bytes) = std::fs::read(layout.topic_model(t)) {
                a.topics_version = Some(topics_version(model.k, &bytes));
            }
            match SnapshotContext::build(store, t, model, docs, &config.pagerank) {
                Ok(ctx) => a.context = Some(Arc::new(ctx)),
                Err(e) => a.missing.push(format!("snapshot context ({e})")),
            }
        }

        for h in 1..=MAX_HORIZON {
            let path = layout.hindex_model(t, h);
            if !path.exists() {
                continue;
            }
            match TrainedModel::load(&path) {
                Ok(m) if m.check_schema(&AUTHOR_FEATURES).is_ok() => {
                    a.hindex.insert(h, LoadedModel::new(m));
                }
                Ok(_) => a.missing.push(format!("h-index model {} has the wrong schema", path.display())),
                Err(e) => a.missing.push(format!("h-index model {} ({e})", path.display())),
            }
        }
        if a.hindex.is_empty() {
            a.missing.push(format!("h-index model for t = {t}"));
        }

        let spec = DatasetSpec {
            t,
            delta_t: cfg.delta_t,
            mode: cfg.mode,
            set: PaperSet::New,
            ..Default::default()
        };
        let path = layout.impact_model(&spec, cfg.learner);
        match TrainedModel::load(&path) {
            Ok(m) => match Classifier::new(m, spec) {
                Ok(c) => a.classifier = Some(c),
                Err(e) => a.missing.push(format!("paper model {} ({e})", path.display())),
            },
            Err(e) => a.missing.push(format!("paper model {} ({e})", path.display())),
        }
        for m in &a.missing {
            log::warn!("artifact missing: {m}");
        }
        a
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Option<T> {
    let bytes = std::fs::read(path).ok()?;
    serde_json::from_slice(&bytes).ok()
}
