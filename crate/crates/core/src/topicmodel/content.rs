//! Content factors over topic distributions: popularity, novelty, diversity
//! and topical authority.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{DocTopics, TopicDistribution, TopicError};
use crate::corpus::{AuthorIdx, CorpusSnapshot, PaperIdx};

fn check_dim(expected: usize, got: usize) -> Result<(), TopicError> {
    if expected == got {
        Ok(())
    } else {
        Err(TopicError::Dimension { expected, got })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Citation-weighted topic mass over a set of papers.
fn weighted_mass(
    snapshot: &CorpusSnapshot,
    doc_topics: &DocTopics,
    papers: impl IntoIterator<Item = PaperIdx>,
) -> Result<Vec<f64>, TopicError> {
    let mut out = vec![0.0; doc_topics.k];
    for p in papers {
        let dist = doc_topics.require(snapshot.store(), p)?;
        let c = f64::from(snapshot.citations(p));
        for (o, q) in out.iter_mut().zip(&dist.probs) {
            *o += q * c;
        }
    }
    Ok(out)
}

/// popularity(z) summed over every paper visible in the snapshot.
pub fn topic_popularity(snapshot: &CorpusSnapshot, doc_topics: &DocTopics) -> Result<Vec<f64>, TopicError> {
    weighted_mass(snapshot, doc_topics, snapshot.visible_papers())
}

pub fn c_popularity(dist: &TopicDistribution, popularity: &[f64]) -> Result<f64, TopicError> {
    check_dim(popularity.len(), dist.k())?;
    Ok(dot(&dist.probs, popularity))
}

/// KL(p || q), natural log.
pub fn kl_divergence(p: &TopicDistribution, q: &TopicDistribution) -> Result<f64, TopicError> {
    check_dim(p.k(), q.k())?;
    for dist in [p, q] {
        if let Some((topic, &value)) = dist.probs.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(TopicError::Domain { topic, value });
        }
    }
    let kl: f64 = p.probs.iter().zip(&q.probs).map(|(a, b)| a * (a / b).ln()).sum();
    Ok(kl.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Novelty {
    pub value: f64,
    pub no_references: bool,
}

/// Mean KL divergence from the paper to each of its references.
pub fn c_novelty(dist: &TopicDistribution, refs: &[&TopicDistribution]) -> Result<Novelty, TopicError> {
    if refs.is_empty() {
        return Ok(Novelty { value: 0.0, no_references: true });
    }
    let mut total = 0.0;
    for r in refs {
        total += kl_divergence(dist, r)?;
    }
    Ok(Novelty {
        value: total / refs.len() as f64,
        no_references: false,
    })
}

/// Shannon entropy, natural log.
pub fn c_diversity(dist: &TopicDistribution) -> f64 {
    dist.probs.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum()
}

/// authority(a, z) over the given papers of one author.
pub fn authority_vector(
    snapshot: &CorpusSnapshot,
    doc_topics: &DocTopics,
    papers: impl IntoIterator<Item = PaperIdx>,
) -> Result<Vec<f64>, TopicError> {
    weighted_mass(snapshot, doc_topics, papers)
}

pub fn c_authority(dist: &TopicDistribution, authority: &[f64]) -> Result<f64, TopicError> {
    check_dim(authority.len(), dist.k())?;
    Ok(dot(&dist.probs, authority))
}

/// Per-author authority vectors over visible papers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorityTable {
    pub k: usize,
    rows: BTreeMap<u32, Vec<f64>>,
}

impl AuthorityTable {
    /// Zero vector for authors absent from the table.
    pub fn get(&self, author: AuthorIdx) -> Vec<f64> {
        self.rows.get(&author.0).cloned().unwrap_or_else(|| vec![0.0; self.k])
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub fn build_authority(snapshot: &CorpusSnapshot, doc_topics: &DocTopics) -> Result<AuthorityTable, TopicError> {
    build_authority_for(snapshot, doc_topics, snapshot.active_authors())
}

/// Authority rows for a chosen set of authors only.
pub fn build_authority_for(
    snapshot: &CorpusSnapshot,
    doc_topics: &DocTopics,
    authors: impl IntoIterator<Item = AuthorIdx>,
) -> Result<AuthorityTable, TopicError> {
    let mut rows = BTreeMap::new();
    for a in authors {
        let papers = snapshot.author_papers(a);
        if papers.is_empty() {
            continue;
        }
        rows.insert(a.0, authority_vector(snapshot, doc_topics, papers.iter().copied())?);
    }
    Ok(AuthorityTable { k: doc_topics.k, rows })
}
