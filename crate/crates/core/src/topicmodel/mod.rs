//! Topic model over titles and abstracts, and the content factors derived
//! from per-document topic distributions.

mod content;
mod lda;
mod tokenize;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use content::{
    authority_vector, build_authority, build_authority_for, c_authority, c_diversity, c_novelty, c_popularity,
    kl_divergence, topic_popularity, AuthorityTable, Novelty,
};
pub use lda::{fit_lda, infer_doc_topics, infer_doc_topics_seeded, inference_seed, LdaConfig};
pub use tokenize::{is_stopword, tokenize};

use crate::corpus::{CorpusSnapshot, CorpusStore, PaperIdx, Year};
use crate::persist::write_atomic_with;

#[derive(Debug, Error)]
pub enum TopicError {
    #[error("no token survives tokenization; cannot fit a topic model")]
    EmptyCorpus,
    #[error("invalid topic model configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("distribution has non-positive entry {value} at topic {topic}")]
    Domain { topic: usize, value: f64 },
    #[error("no topic distribution for paper {0}")]
    MissingTopics(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("topic file error: {0}")]
    Format(String),
}

/// p(z|d) for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicDistribution {
    pub probs: Vec<f64>,
    /// Set when the document had no in-vocabulary token and fell back to
    /// the uniform distribution.
    pub all_oov: bool,
}

impl TopicDistribution {
    pub fn uniform(k: usize, all_oov: bool) -> Self {
        TopicDistribution {
            probs: vec![1.0 / k as f64; k],
            all_oov,
        }
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }
}

/// A fitted topic model: vocabulary plus topic-word counts from the final
/// Gibbs state. Smoothed probabilities are derived on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub iterations: usize,
    pub infer_iterations: usize,
    pub vocab: Vec<String>,
    #[serde(skip)]
    word_index: HashMap<String, u32>,
    /// Row-major `k x vocab.len()` counts.
    pub topic_word_counts: Vec<u32>,
    pub topic_totals: Vec<u64>,
}

pub const TOPIC_MAGIC: &[u8; 8] = b"HFTOPICS";
pub const DOC_TOPICS_MAGIC: &[u8; 8] = b"HFDOCTOP";
pub const TOPIC_FORMAT_VERSION: u32 = 1;

impl TopicModel {
    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    /// Smoothed p(w|z).
    pub fn phi(&self, z: usize, w: usize) -> f64 {
        let v = self.vocab.len();
        (f64::from(self.topic_word_counts[z * v + w]) + self.beta) / (self.topic_totals[z] as f64 + v as f64 * self.beta)
    }

    pub fn topic_word(&self, z: usize) -> Vec<f64> {
        (0..self.vocab.len()).map(|w| self.phi(z, w)).collect()
    }

    pub fn word_id(&self, word: &str) -> Option<u32> {
        self.word_index.get(word).copied()
    }

    fn rebuild_index(&mut self) {
        self.word_index = self
            .vocab
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
    }

    pub fn top_words(&self, n: usize) -> Vec<Vec<(String, f64)>> {
        (0..self.k)
            .map(|z| {
                let row = self.topic_word(z);
                let mut idx: Vec<usize> = (0..row.len()).collect();
                idx.sort_by(|a, b| row[*b].total_cmp(&row[*a]).then(a.cmp(b)));
                idx.into_iter().take(n).map(|w| (self.vocab[w].clone(), row[w])).collect()
            })
            .collect()
    }

    pub fn top_words_text(&self, n: usize) -> String {
        let mut s = String::new();
        for (z, words) in self.top_words(n).into_iter().enumerate() {
            let list: Vec<String> = words.into_iter().map(|(w, _)| w).collect();
            let _ = writeln!(s, "topic {z:>3}: {}", list.join(" "));
        }
        s
    }

    /// Layout: magic, u32 version, u32 K, u32 V, u64 seed, f64 alpha, f64
    /// beta (all little-endian), then a bincode body with the vocabulary and
    /// count matrices.
    pub fn save(&self, path: &Path) -> Result<(), TopicError> {
        write_atomic_with(path, |file| {
            let mut w = BufWriter::new(file);
            w.write_all(TOPIC_MAGIC)?;
            w.write_all(&TOPIC_FORMAT_VERSION.to_le_bytes())?;
            w.write_all(&(self.k as u32).to_le_bytes())?;
            w.write_all(&(self.vocab.len() as u32).to_le_bytes())?;
            w.write_all(&self.seed.to_le_bytes())?;
            w.write_all(&self.alpha.to_le_bytes())?;
            w.write_all(&self.beta.to_le_bytes())?;
            bincode::serialize_into(&mut w, self).map_err(std::io::Error::other)?;
            w.flush()
        })?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, TopicError> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != TOPIC_MAGIC {
            return Err(TopicError::Format("bad magic header".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != TOPIC_FORMAT_VERSION {
            return Err(TopicError::Format(format!("unsupported version {version}")));
        }
        let mut header = [0u8; 4 + 4 + 8 + 8 + 8];
        r.read_exact(&mut header)?;
        let k = u32::from_le_bytes(header[0..4].try_into().unwrap()) as usize;
        let v = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let mut model: TopicModel =
            bincode::deserialize_from(&mut r).map_err(|e| TopicError::Format(e.to_string()))?;
        if model.k != k || model.vocab.len() != v || model.topic_word_counts.len() != k * v {
            return Err(TopicError::Format("header does not match body".into()));
        }
        model.rebuild_index();
        Ok(model)
    }
}

/// Per-paper topic distributions, indexed by [`PaperIdx`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocTopics {
    pub k: usize,
    dists: Vec<Option<TopicDistribution>>,
}

impl DocTopics {
    pub fn new(k: usize, num_papers: usize) -> Self {
        DocTopics {
            k,
            dists: vec![None; num_papers],
        }
    }

    pub fn get(&self, paper: PaperIdx) -> Option<&TopicDistribution> {
        self.dists.get(paper.index()).and_then(Option::as_ref)
    }

    pub fn require(&self, store: &CorpusStore, paper: PaperIdx) -> Result<&TopicDistribution, TopicError> {
        self.get(paper)
            .ok_or_else(|| TopicError::MissingTopics(store.paper(paper).paper_id.clone()))
    }

    pub fn set(&mut self, paper: PaperIdx, dist: TopicDistribution) {
        self.dists[paper.index()] = Some(dist);
    }

    pub fn num_covered(&self) -> usize {
        self.dists.iter().filter(|d| d.is_some()).count()
    }

    pub fn save(&self, path: &Path) -> Result<(), TopicError> {
        write_atomic_with(path, |file| {
            let mut w = BufWriter::new(file);
            w.write_all(DOC_TOPICS_MAGIC)?;
            w.write_all(&TOPIC_FORMAT_VERSION.to_le_bytes())?;
            bincode::serialize_into(&mut w, self).map_err(std::io::Error::other)?;
            w.flush()
        })?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, TopicError> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != DOC_TOPICS_MAGIC {
            return Err(TopicError::Format("bad magic header".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        if u32::from_le_bytes(b4) != TOPIC_FORMAT_VERSION {
            return Err(TopicError::Format("unsupported doc-topics version".into()));
        }
        bincode::deserialize_from(&mut r).map_err(|e| TopicError::Format(e.to_string()))
    }
}

/// Which papers the topic model is fit on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainingScope {
    /// Fit on papers published before `t`; papers published in `t` are
    /// folded in afterwards.
    #[default]
    BeforeT,
    /// Fit jointly on every paper visible at `t`.
    Joint,
}

/// Fits the topic model for snapshot year `t` and produces distributions for
/// every visible paper.
pub fn fit_snapshot_topics(
    snapshot: &CorpusSnapshot,
    config: &LdaConfig,
    scope: TrainingScope,
) -> Result<(TopicModel, DocTopics), TopicError> {
    let store = snapshot.store();
    let t: Year = snapshot.t();
    let in_training = |year: Year| match scope {
        TrainingScope::BeforeT => year < t,
        TrainingScope::Joint => year <= t,
    };
    let mut train_ids = Vec::new();
    let mut docs = Vec::new();
    let mut fold_in = Vec::new();
    for p in snapshot.visible_papers() {
        let rec = store.paper(p);
        if in_training(rec.year) {
            train_ids.push(p);
            docs.push(tokenize(&rec.title, &rec.abstract_text));
        } else {
            fold_in.push(p);
        }
    }
    let (model, dists) = fit_lda(&docs, config)?;
    let mut doc_topics = DocTopics::new(model.k, store.num_papers());
    for (p, d) in train_ids.into_iter().zip(dists) {
        doc_topics.set(p, d);
    }
    for p in fold_in {
        let rec = store.paper(p);
        doc_topics.set(p, infer_doc_topics(&model, &tokenize(&rec.title, &rec.abstract_text)));
    }
    Ok((model, doc_topics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::RawPaper;
    use std::sync::Arc;

    #[test]
    fn save_load_roundtrip() {
        let docs: Vec<Vec<String>> = vec![
            vec!["graph".into(), "mining".into()],
            vec!["neural".into(), "graph".into()],
        ];
        let (model, _) = fit_lda(&docs, &LdaConfig { k: 2, iterations: 5, ..Default::default() }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("topics.bin");
        model.save(&path).unwrap();
        let loaded = TopicModel::load(&path).unwrap();
        assert_eq!(loaded, model);
        assert_eq!(loaded.word_id("mining"), model.word_id("mining"));
        let raw = std::fs::read(&path).unwrap();
        assert_eq!(&raw[..8], TOPIC_MAGIC);
        assert_eq!(u32::from_le_bytes(raw[12..16].try_into().unwrap()), 2);
    }

    #[test]
    fn top_words_are_sorted() {
        let docs: Vec<Vec<String>> = vec![vec!["a".into(), "a".into(), "a".into(), "b".into()]];
        let (model, _) = fit_lda(&docs, &LdaConfig { k: 1, iterations: 3, ..Default::default() }).unwrap();
        let top = model.top_words(10);
        assert_eq!(top[0][0].0, "a");
        assert_eq!(top[0].len(), 2);
        assert!(model.top_words_text(10).starts_with("topic   0: a b"));
    }

    #[test]
    fn snapshot_topics_cover_visible_papers() {
        let store = Arc::new(
            CorpusStore::from_records(vec![
                RawPaper::new("a", 2000).title("graph mining methods"),
                RawPaper::new("b", 2001).title("neural graph learning"),
                RawPaper::new("c", 2002).title("graph mining at scale"),
                RawPaper::new("d", 2003).title("future work"),
            ])
            .unwrap(),
        );
        let snap = CorpusSnapshot::build(store.clone(), 2002);
        let cfg = LdaConfig { k: 2, iterations: 10, ..Default::default() };
        let (model, topics) = fit_snapshot_topics(&snap, &cfg, TrainingScope::BeforeT).unwrap();
        assert_eq!(topics.num_covered(), 3);
        assert!(topics.get(PaperIdx(3)).is_none());
        // "c" is folded in with the content-derived seed
        let c = store.paper(PaperIdx(2));
        assert_eq!(topics.get(PaperIdx(2)).unwrap(), &infer_doc_topics(&model, &tokenize(&c.title, "")));
        let (joint, _) = fit_snapshot_topics(&snap, &cfg, TrainingScope::Joint).unwrap();
        assert!(joint.word_id("scale").is_some());
        assert!(model.word_id("scale").is_none());
    }
}
