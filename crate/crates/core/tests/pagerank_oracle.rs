use std::sync::Arc;

use hforecast::collabnet::{pagerank, CollabGraph, PageRankConfig};
use hforecast::corpus::{CorpusSnapshot, CorpusStore, RawPaper};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Stationary vector of the damped walk, by solving the linear system
/// (I - d S^T) r = (1 - d)/n, with dangling rows of S uniform.
fn dense_oracle(graph: &CollabGraph, damping: f64) -> Vec<f64> {
    let n = graph.num_nodes();
    let mut s = DMatrix::<f64>::zeros(n, n);
    for (i, a) in graph.nodes().iter().enumerate() {
        let total: f64 = graph.neighbors(*a).map(|(_, w)| f64::from(w)).sum();
        if total == 0.0 {
            s.row_mut(i).fill(1.0 / n as f64);
            continue;
        }
        for (b, w) in graph.neighbors(*a) {
            let j = graph.nodes().iter().position(|x| *x == b).unwrap();
            s[(i, j)] = f64::from(w) / total;
        }
    }
    let m = DMatrix::<f64>::identity(n, n) - s.transpose() * damping;
    let rhs = DVector::<f64>::from_element(n, (1.0 - damping) / n as f64);
    let r = m.lu().solve(&rhs).unwrap();
    let sum = r.sum();
    r.iter().map(|x| x / sum).collect()
}

fn random_corpus(papers: &[Vec<u8>]) -> CorpusSnapshot {
    let raw = papers
        .iter()
        .enumerate()
        .map(|(i, authors)| {
            let names: Vec<String> = authors.iter().map(|a| format!("a{a}")).collect();
            RawPaper::new(format!("p{i}"), 2000).authors(&names)
        })
        .collect();
    CorpusSnapshot::build(Arc::new(CorpusStore::from_records(raw).unwrap()), 2000)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn matches_dense_solve(papers in prop::collection::vec(prop::collection::vec(0u8..15, 1..4), 1..25)) {
        let snap = random_corpus(&papers);
        let graph = CollabGraph::build(&snap);
        let cfg = PageRankConfig::default();
        let pr = pagerank(&graph, &cfg).unwrap();
        let oracle = dense_oracle(&graph, cfg.damping);
        let total: f64 = pr.scores().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-8);
        for (i, a) in graph.nodes().iter().enumerate() {
            prop_assert!((pr.get(*a) - oracle[i]).abs() < 1e-8, "node {} {} vs {}", i, pr.get(*a), oracle[i]);
            prop_assert!(pr.get(*a) > 0.0);
        }
    }

    #[test]
    fn build_ignores_paper_order(papers in prop::collection::vec(prop::collection::vec(0u8..10, 1..4), 1..20)) {
        let forward = random_corpus(&papers);
        let mut rev = papers.clone();
        rev.reverse();
        let backward = random_corpus(&rev);
        let g1 = CollabGraph::build(&forward);
        let g2 = CollabGraph::build(&backward);
        let mut e1 = Vec::new();
        let mut e2 = Vec::new();
        g1.write_edge_list(forward.store(), &mut e1).unwrap();
        g2.write_edge_list(backward.store(), &mut e2).unwrap();
        let mut l1: Vec<&str> = std::str::from_utf8(&e1).unwrap().lines().collect();
        let mut l2: Vec<&str> = std::str::from_utf8(&e2).unwrap().lines().collect();
        // Undirected edges may print with endpoints swapped.
        let norm = |l: &mut Vec<&str>| -> Vec<String> {
            let mut v: Vec<String> = l.drain(..).map(|s| {
                let f: Vec<&str> = s.split('\t').collect();
                let (x, y) = if f[0] < f[1] { (f[0], f[1]) } else { (f[1], f[0]) };
                format!("{x} {y} {}", f[2])
            }).collect();
            v.sort();
            v
        };
        prop_assert_eq!(norm(&mut l1), norm(&mut l2));
    }
}
