//! On-disk layout of pipeline artifacts under one cache directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::Year;
use crate::factorlab::DatasetSpec;
use crate::learners::LearnerKind;
use crate::pipeline::PipelineConfig;

/// Key under which a model's run config records the dataset spec it was
/// trained on.
pub const SPEC_KEY: &str = "spec";

/// Sidecar written next to a fitted topic model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicsStamp {
    pub t: Year,
    pub corpus_checksum: String,
    pub config: PipelineConfig,
}

/// Version tag of a topic model: its K and a hash of the model file.
pub fn topics_version(k: usize, model_file: &[u8]) -> String {
    format!("topics-k{k}-{:016x}", crate::persist::fnv1a(model_file))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactLayout {
    root: PathBuf,
}

impl ArtifactLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        ArtifactLayout { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn corpus_cache(&self) -> PathBuf {
        self.root.join("corpus.bin")
    }

    pub fn ingest_report(&self) -> PathBuf {
        self.root.join("corpus.json")
    }

    pub fn topic_model(&self, t: Year) -> PathBuf {
        self.root.join("topics").join(format!("t{t}.model"))
    }

    pub fn doc_topics(&self, t: Year) -> PathBuf {
        self.root.join("topics").join(format!("t{t}.docs"))
    }

    /// JSON sidecar with the configuration the topic model was fit with.
    pub fn topics_config(&self, t: Year) -> PathBuf {
        self.root.join("topics").join(format!("t{t}.json"))
    }

    pub fn graph_table(&self, t: Year) -> PathBuf {
        self.root.join("graph").join(format!("t{t}.tsv"))
    }

    pub fn dataset(&self, spec: &DatasetSpec) -> PathBuf {
        let flags = if spec.include_flags { "-flags" } else { "" };
        self.root.join("datasets").join(format!(
            "{}-{}-t{}-dt{}-h{}-{}{flags}.csv",
            spec.set,
            spec.mode,
            spec.t,
            spec.delta_t,
            spec.min_h,
            match spec.future_h_source {
                crate::factorlab::FutureHSource::Observed => "obs",
                crate::factorlab::FutureHSource::Predicted => "pred",
            }
        ))
    }

    pub fn hindex_model(&self, t: Year, delta_t: u32) -> PathBuf {
        self.root.join("models").join(format!("hindex-t{t}-dt{delta_t}.json"))
    }

    pub fn impact_model(&self, spec: &DatasetSpec, learner: LearnerKind) -> PathBuf {
        self.root.join("models").join(format!(
            "impact-{}-{}-{}-t{}-dt{}.json",
            learner.short(),
            spec.set,
            spec.mode,
            spec.t,
            spec.delta_t
        ))
    }

    pub fn reports(&self) -> PathBuf {
        self.root.join("reports")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorlab::{PaperSet, PrimaryMode};

    #[test]
    fn names_encode_the_spec() {
        let l = ArtifactLayout::new("/c");
        let spec = DatasetSpec { set: PaperSet::Old, mode: PrimaryMode::First, ..Default::default() };
        assert_eq!(l.dataset(&spec), PathBuf::from("/c/datasets/old-first-t2007-dt5-h10-obs.csv"));
        assert_eq!(
            l.impact_model(&spec, LearnerKind::RandomForest),
            PathBuf::from("/c/models/impact-rf-old-first-t2007-dt5.json")
        );
        assert_eq!(l.hindex_model(2002, 10), PathBuf::from("/c/models/hindex-t2002-dt10.json"));
    }
}
