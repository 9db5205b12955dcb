use std::sync::Arc;

use super::FactorError;
use crate::collabnet::{pagerank, CollabGraph, PageRank, PageRankConfig};
use crate::corpus::{CorpusSnapshot, CorpusStore, Year};
use crate::scholarmetrics::VenueStatsTable;
use crate::topicmodel::{topic_popularity, DocTopics, TopicModel};

/// Years over which temporal factors measure h-index growth.
pub const TEMPORAL_WINDOW: u32 = 3;

/// Everything factor assembly reads at snapshot year `t`.
#[derive(Debug, Clone)]
pub struct SnapshotContext {
    pub snapshot: CorpusSnapshot,
    /// The corpus at `t - TEMPORAL_WINDOW`.
    pub past: CorpusSnapshot,
    pub model: TopicModel,
    pub doc_topics: DocTopics,
    pub popularity: Vec<f64>,
    pub graph: CollabGraph,
    pub pagerank: PageRank,
    pub venues: VenueStatsTable,
}

impl SnapshotContext {
    pub fn build(
        store: Arc<CorpusStore>,
        t: Year,
        model: TopicModel,
        doc_topics: DocTopics,
        pagerank_config: &PageRankConfig,
    ) -> Result<Self, FactorError> {
        let snapshot = CorpusSnapshot::build(store.clone(), t);
        if snapshot.is_empty() {
            return Err(FactorError::Dependency(format!("snapshot at {t} has no visible papers")));
        }
        if doc_topics.k != model.k {
            return Err(FactorError::Dependency(format!(
                "doc topics have k = {} but the topic model has k = {}",
                doc_topics.k, model.k
            )));
        }
        if let Some(p) = snapshot.visible_papers().find(|p| doc_topics.get(*p).is_none()) {
            return Err(FactorError::Dependency(format!(
                "topic distribution for visible paper {}",
                store.paper(p).paper_id
            )));
        }
        let past = CorpusSnapshot::build(store, t - TEMPORAL_WINDOW as Year);
        let popularity = topic_popularity(&snapshot, &doc_topics)?;
        let graph = CollabGraph::build(&snapshot);
        let pagerank = pagerank(&graph, pagerank_config)
            .map_err(|e| FactorError::Dependency(format!("collaboration graph: {e}")))?;
        let venues = VenueStatsTable::build(&snapshot);
        Ok(SnapshotContext {
            snapshot,
            past,
            model,
            doc_topics,
            popularity,
            graph,
            pagerank,
            venues,
        })
    }

    pub fn t(&self) -> Year {
        self.snapshot.t()
    }

    pub fn store(&self) -> &CorpusStore {
        self.snapshot.store()
    }
}
