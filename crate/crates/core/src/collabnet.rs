//! Weighted co-authorship network at a snapshot and the social factors
//! derived from it.

use std::collections::HashMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AuthorIdx, CorpusSnapshot, CorpusStore};

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("collaboration graph has no nodes")]
    EmptyGraph,
    #[error("author {0} is not in the collaboration graph")]
    UnknownAuthor(String),
    #[error("invalid pagerank configuration: {0}")]
    InvalidConfig(String),
}

/// Undirected co-author graph. Nodes are authors with at least one visible
/// paper; edge weight counts shared visible papers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollabGraph {
    nodes: Vec<AuthorIdx>,
    /// Author index -> node position.
    node_of: HashMap<u32, u32>,
    /// Per node, `(neighbor node, weight)` sorted by neighbor.
    adjacency: Vec<Vec<(u32, u32)>>,
}

impl CollabGraph {
    pub fn build(snapshot: &CorpusSnapshot) -> Self {
        let store = snapshot.store();
        let mut nodes: Vec<AuthorIdx> = snapshot.active_authors().collect();
        nodes.sort();
        let node_of: HashMap<u32, u32> = nodes.iter().enumerate().map(|(i, a)| (a.0, i as u32)).collect();
        let mut weights: HashMap<(u32, u32), u32> = HashMap::new();
        let mut authors: Vec<u32> = Vec::new();
        for p in snapshot.visible_papers() {
            authors.clear();
            authors.extend(store.paper(p).author_ids.iter().map(|a| node_of[&a.0]));
            authors.sort_unstable();
            authors.dedup();
            for (i, &a) in authors.iter().enumerate() {
                for &b in &authors[i + 1..] {
                    *weights.entry((a, b)).or_insert(0) += 1;
                }
            }
        }
        let mut adjacency: Vec<Vec<(u32, u32)>> = vec![Vec::new(); nodes.len()];
        for ((a, b), w) in weights {
            adjacency[a as usize].push((b, w));
            adjacency[b as usize].push((a, w));
        }
        for row in &mut adjacency {
            row.sort_unstable();
        }
        CollabGraph { nodes, node_of, adjacency }
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn nodes(&self) -> &[AuthorIdx] {
        &self.nodes
    }

    pub fn contains(&self, author: AuthorIdx) -> bool {
        self.node_of.contains_key(&author.0)
    }

    fn node(&self, author: AuthorIdx) -> Option<usize> {
        self.node_of.get(&author.0).map(|n| *n as usize)
    }

    /// `(co-author, weight)` pairs, empty for authors outside the graph.
    pub fn neighbors(&self, author: AuthorIdx) -> impl Iterator<Item = (AuthorIdx, u32)> + '_ {
        self.node(author)
            .map(|n| self.adjacency[n].as_slice())
            .unwrap_or(&[])
            .iter()
            .map(|(m, w)| (self.nodes[*m as usize], *w))
    }

    /// Number of distinct co-authors.
    pub fn degree(&self, author: AuthorIdx) -> usize {
        self.node(author).map_or(0, |n| self.adjacency[n].len())
    }

    pub fn weight(&self, a: AuthorIdx, b: AuthorIdx) -> u32 {
        match (self.node(a), self.node(b)) {
            (Some(x), Some(y)) => self.adjacency[x]
                .binary_search_by_key(&(y as u32), |(m, _)| *m)
                .map_or(0, |i| self.adjacency[x][i].1),
            _ => 0,
        }
    }

    /// One `author<TAB>author<TAB>weight` line per edge, each edge once.
    pub fn write_edge_list<W: Write>(&self, store: &CorpusStore, mut out: W) -> io::Result<()> {
        for (a, row) in self.adjacency.iter().enumerate() {
            for &(b, w) in row {
                if (a as u32) < b {
                    let an = &store.author(self.nodes[a]).name;
                    let bn = &store.author(self.nodes[b as usize]).name;
                    writeln!(out, "{an}\t{bn}\t{w}")?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRank {
    scores: Vec<f64>,
    node_of: HashMap<u32, u32>,
    pub iterations: usize,
    pub converged: bool,
}

impl PageRank {
    /// Score of an author; 0 outside the graph.
    pub fn get(&self, author: AuthorIdx) -> f64 {
        self.node_of.get(&author.0).map_or(0.0, |n| self.scores[*n as usize])
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }
}

/// Weighted PageRank: a walker follows an edge with probability proportional
/// to its weight; isolated authors teleport uniformly.
pub fn pagerank(graph: &CollabGraph, config: &PageRankConfig) -> Result<PageRank, GraphError> {
    let n = graph.num_nodes();
    if n == 0 {
        return Err(GraphError::EmptyGraph);
    }
    if !(0.0..1.0).contains(&config.damping) {
        return Err(GraphError::InvalidConfig("damping must lie in [0, 1)".into()));
    }
    let d = config.damping;
    let out_weight: Vec<f64> = graph
        .adjacency
        .iter()
        .map(|row| row.iter().map(|(_, w)| f64::from(*w)).sum())
        .collect();
    let mut rank = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        iterations += 1;
        let dangling: f64 = (0..n).filter(|i| out_weight[*i] == 0.0).map(|i| rank[i]).sum();
        let base = (1.0 - d) / n as f64 + d * dangling / n as f64;
        next.iter_mut().for_each(|x| *x = base);
        for (i, row) in graph.adjacency.iter().enumerate() {
            if out_weight[i] == 0.0 {
                continue;
            }
            let share = d * rank[i] / out_weight[i];
            for &(j, w) in row {
                next[j as usize] += share * f64::from(w);
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let delta: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if delta < config.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("pagerank stopped after {iterations} iterations without reaching tolerance");
    }
    Ok(PageRank {
        scores: rank,
        node_of: graph.node_of.clone(),
        iterations,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoauthorH {
    pub avg_h: f64,
    pub weighted_avg_h: f64,
}

/// Mean and collaboration-weighted mean h-index of an author's co-authors.
pub fn coauthor_h_stats(
    graph: &CollabGraph,
    snapshot: &CorpusSnapshot,
    author: AuthorIdx,
) -> Result<CoauthorH, GraphError> {
    if !graph.contains(author) {
        return Err(GraphError::UnknownAuthor(snapshot.store().author(author).name.clone()));
    }
    let (mut n, mut sum, mut wsum, mut wtotal) = (0usize, 0.0, 0.0, 0.0);
    for (b, w) in graph.neighbors(author) {
        let h = f64::from(snapshot.author_h(b));
        n += 1;
        sum += h;
        wsum += h * f64::from(w);
        wtotal += f64::from(w);
    }
    if n == 0 {
        return Ok(CoauthorH { avg_h: 0.0, weighted_avg_h: 0.0 });
    }
    Ok(CoauthorH {
        avg_h: sum / n as f64,
        weighted_avg_h: wsum / wtotal,
    })
}

/// The four social metrics of one author.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SocialStats {
    pub degree: f64,
    pub pagerank: f64,
    pub h_coauthor: f64,
    pub h_weight: f64,
}

impl SocialStats {
    pub fn max(self, other: SocialStats) -> SocialStats {
        SocialStats {
            degree: self.degree.max(other.degree),
            pagerank: self.pagerank.max(other.pagerank),
            h_coauthor: self.h_coauthor.max(other.h_coauthor),
            h_weight: self.h_weight.max(other.h_weight),
        }
    }
}

/// Zero for authors outside the graph.
pub fn author_social_stats(
    graph: &CollabGraph,
    pr: &PageRank,
    snapshot: &CorpusSnapshot,
    author: AuthorIdx,
) -> SocialStats {
    match coauthor_h_stats(graph, snapshot, author) {
        Ok(h) => SocialStats {
            degree: graph.degree(author) as f64,
            pagerank: pr.get(author),
            h_coauthor: h.avg_h,
            h_weight: h.weighted_avg_h,
        },
        Err(_) => SocialStats::default(),
    }
}

/// S-degree, S-pagerank, S-h-coauthor, S-h-weight: each the maximum over the
/// paper's authors.
pub fn social_factors(
    authors: &[AuthorIdx],
    graph: &CollabGraph,
    pr: &PageRank,
    snapshot: &CorpusSnapshot,
) -> SocialStats {
    authors
        .iter()
        .map(|a| author_social_stats(graph, pr, snapshot, *a))
        .fold(SocialStats::default(), SocialStats::max)
}
