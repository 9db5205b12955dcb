use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_labels, check_matrix, LearnerError, LearnerKind, ModelParams, Standardizer, TrainedModel};
use crate::persist::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            n_trees: 100,
            max_depth: 32,
            min_samples_split: 2,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeNode {
    Leaf { p: f64 },
    Split { feature: u32, threshold: f64, left: u32, right: u32 },
}

/// A CART classification tree stored as a flat node list rooted at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { p } => return *p,
                TreeNode::Split { feature, threshold, left, right } => {
                    i = if row[*feature as usize] <= *threshold { *left } else { *right } as usize;
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(t, *left as usize).max(walk(t, *right as usize)),
            }
        }
        walk(self, 0)
    }
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [bool],
    cfg: &'a TreeConfig,
    max_features: usize,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn best_split(&self, idx: &[usize], rng: &mut ChaCha8Rng) -> Option<(usize, f64)> {
        let d = self.x[0].len();
        let features: Vec<usize> = if self.max_features >= d {
            (0..d).collect()
        } else {
            sample(rng, d, self.max_features).into_vec()
        };
        let n = idx.len();
        let total_pos = idx.iter().filter(|i| self.y[**i]).count();
        let parent = gini(total_pos, n);
        let mut best: Option<(usize, f64, f64)> = None;
        let mut order = idx.to_vec();
        for f in features {
            order.sort_by(|a, b| self.x[*a][f].total_cmp(&self.x[*b][f]));
            let mut left_pos = 0;
            for k in 1..n {
                left_pos += self.y[order[k - 1]] as usize;
                let lo = self.x[order[k - 1]][f];
                let hi = self.x[order[k]][f];
                if lo == hi || k < self.cfg.min_samples_leaf || n - k < self.cfg.min_samples_leaf {
                    continue;
                }
                let imp = (k as f64 * gini(left_pos, k) + (n - k) as f64 * gini(total_pos - left_pos, n - k)) / n as f64;
                let gain = parent - imp;
                if gain > 1e-12 && best.is_none_or(|(_, _, g)| gain > g) {
                    let mid = lo + (hi - lo) / 2.0;
                    best = Some((f, if mid < hi { mid } else { lo }, gain));
                }
            }
        }
        best.map(|(f, t, _)| (f, t))
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> u32 {
        let id = self.nodes.len() as u32;
        let pos = idx.iter().filter(|i| self.y[**i]).count();
        let p = pos as f64 / idx.len() as f64;
        self.nodes.push(TreeNode::Leaf { p });
        if pos == 0 || pos == idx.len() || depth >= self.cfg.max_depth || idx.len() < self.cfg.min_samples_split {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&idx, rng) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|i| self.x[**i][feature] <= threshold);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[id as usize] = TreeNode::Split {
            feature: feature as u32,
            threshold,
            left,
            right,
        };
        id
    }
}

fn fit_tree(x: &[Vec<f64>], y: &[bool], cfg: &TreeConfig, max_features: usize, seed: u64) -> Tree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = x.len();
    let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let mut b = Builder {
        x,
        y,
        cfg,
        max_features,
        nodes: Vec::new(),
    };
    b.grow(idx, 0, &mut rng);
    Tree { nodes: b.nodes }
}

/// Bootstrap ensemble of CART trees. Random forests additionally sample
/// floor(sqrt(F)) candidate features at each split.
pub fn fit_tree_ensemble(
    x: &[Vec<f64>],
    y: &[bool],
    names: &[String],
    kind: LearnerKind,
    cfg: &TreeConfig,
    seed: u64,
) -> Result<TrainedModel, LearnerError> {
    let d = check_matrix(x)?;
    check_labels(x, y)?;
    if cfg.n_trees == 0 {
        return Err(LearnerError::Shape("ensemble needs at least one tree".into()));
    }
    let max_features = match kind {
        LearnerKind::RandomForest => ((d as f64).sqrt().floor() as usize).max(1),
        LearnerKind::BaggedTrees => d,
        other => return Err(LearnerError::WrongKind(other, "tree ensemble")),
    };
    let trees: Vec<Tree> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| fit_tree(x, y, cfg, max_features, derive_seed(seed, t as u64)))
        .collect();
    let s = Standardizer::fit(x)?;
    TrainedModel::new(kind, names, s, seed, ModelParams::Trees { trees })
}
