//! Collapsed Gibbs sampling for LDA, plus fold-in inference against a frozen
//! topic-word matrix.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{TopicDistribution, TopicError, TopicModel};
use crate::persist::{derive_seed, fnv1a};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub k: usize,
    /// Document-topic prior; `None` means `50 / k`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    /// Fold-in sweeps for unseen documents.
    pub infer_iterations: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            k: 100,
            alpha: None,
            beta: 0.01,
            iterations: 500,
            infer_iterations: 100,
            seed: 42,
        }
    }
}

impl LdaConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.k as f64)
    }
}

fn sample_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        u -= w;
        if u < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// Number of sweeps (from the end) whose doc-topic states are averaged.
fn averaging_window(iterations: usize) -> usize {
    (iterations / 2).max(1)
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Fits LDA by collapsed Gibbs sampling.
///
/// Returns the model and one distribution per input document, in input
/// order. Document distributions are posterior means averaged over the second
/// half of the sweeps; topic-word counts come from the final state.
pub fn fit_lda(docs: &[Vec<String>], config: &LdaConfig) -> Result<(TopicModel, Vec<TopicDistribution>), TopicError> {
    let k = config.k;
    if k == 0 {
        return Err(TopicError::InvalidConfig("k must be at least 1".into()));
    }
    if config.iterations == 0 {
        return Err(TopicError::InvalidConfig("iterations must be at least 1".into()));
    }
    let alpha = config.alpha();
    let beta = config.beta;
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(TopicError::InvalidConfig("alpha and beta must be positive".into()));
    }

    let mut vocab: Vec<String> = Vec::new();
    let mut word_index: HashMap<String, u32> = HashMap::new();
    let encoded: Vec<Vec<u32>> = docs
        .iter()
        .map(|d| {
            d.iter()
                .map(|w| {
                    *word_index.entry(w.clone()).or_insert_with(|| {
                        vocab.push(w.clone());
                        (vocab.len() - 1) as u32
                    })
                })
                .collect()
        })
        .collect();
    if vocab.is_empty() {
        return Err(TopicError::EmptyCorpus);
    }
    let v = vocab.len();
    let vbeta = v as f64 * beta;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut topic_word = vec![0u32; k * v];
    let mut topic_totals = vec![0u64; k];
    let mut doc_topic: Vec<Vec<u32>> = vec![vec![0u32; k]; encoded.len()];
    let mut assignments: Vec<Vec<u16>> = Vec::with_capacity(encoded.len());
    assert!(k <= u16::MAX as usize + 1, "topic count exceeds assignment width");

    for (d, words) in encoded.iter().enumerate() {
        let mut z_d = Vec::with_capacity(words.len());
        for &w in words {
            let z = rng.random_range(0..k);
            z_d.push(z as u16);
            topic_word[z * v + w as usize] += 1;
            topic_totals[z] += 1;
            doc_topic[d][z] += 1;
        }
        assignments.push(z_d);
    }

    let window = averaging_window(config.iterations);
    let mut theta_sum: Vec<Vec<f64>> = vec![vec![0.0; k]; encoded.len()];
    let mut weights = vec![0.0f64; k];
    let kalpha = k as f64 * alpha;

    for sweep in 0..config.iterations {
        for (d, words) in encoded.iter().enumerate() {
            let z_d = &mut assignments[d];
            let n_d = &mut doc_topic[d];
            for (i, &w) in words.iter().enumerate() {
                let w = w as usize;
                let old = z_d[i] as usize;
                topic_word[old * v + w] -= 1;
                topic_totals[old] -= 1;
                n_d[old] -= 1;
                for z in 0..k {
                    weights[z] = (f64::from(n_d[z]) + alpha) * (f64::from(topic_word[z * v + w]) + beta)
                        / (topic_totals[z] as f64 + vbeta);
                }
                let new = sample_index(&mut rng, &weights);
                z_d[i] = new as u16;
                topic_word[new * v + w] += 1;
                topic_totals[new] += 1;
                n_d[new] += 1;
            }
        }
        if sweep + window >= config.iterations {
            for (d, words) in encoded.iter().enumerate() {
                let denom = words.len() as f64 + kalpha;
                for z in 0..k {
                    theta_sum[d][z] += (f64::from(doc_topic[d][z]) + alpha) / denom;
                }
            }
        }
    }

    let distributions = encoded
        .iter()
        .zip(theta_sum)
        .map(|(words, theta)| TopicDistribution {
            probs: normalize(theta),
            all_oov: words.is_empty(),
        })
        .collect();

    let model = TopicModel {
        k,
        alpha,
        beta,
        seed: config.seed,
        iterations: config.iterations,
        infer_iterations: config.infer_iterations.max(1),
        vocab,
        word_index,
        topic_word_counts: topic_word,
        topic_totals,
    };
    Ok((model, distributions))
}

/// Seed used to fold a token sequence into a model. Depends only on the model
/// seed and the tokens, so identical inputs always receive identical draws.
pub fn inference_seed(model: &TopicModel, tokens: &[String]) -> u64 {
    derive_seed(model.seed, fnv1a(tokens.join("\u{1f}").as_bytes()))
}

/// Fold-in Gibbs sampling of one document against the frozen model.
///
/// Out-of-vocabulary tokens are ignored. A document with no known token gets
/// the uniform distribution and `all_oov = true`.
pub fn infer_doc_topics(model: &TopicModel, tokens: &[String]) -> TopicDistribution {
    infer_doc_topics_seeded(model, tokens, inference_seed(model, tokens))
}

pub fn infer_doc_topics_seeded(model: &TopicModel, tokens: &[String], seed: u64) -> TopicDistribution {
    let k = model.k;
    let words: Vec<usize> = tokens
        .iter()
        .filter_map(|t| model.word_index.get(t).map(|w| *w as usize))
        .collect();
    if words.is_empty() {
        return TopicDistribution::uniform(k, true);
    }
    if k == 1 {
        return TopicDistribution::uniform(1, false);
    }

    // phi[w][z] for the document's words only.
    let phi: Vec<Vec<f64>> = words
        .iter()
        .map(|&w| (0..k).map(|z| model.phi(z, w)).collect())
        .collect();
    let alpha = model.alpha;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z_d: Vec<usize> = (0..words.len()).map(|_| rng.random_range(0..k)).collect();
    let mut n_d = vec![0u32; k];
    z_d.iter().for_each(|z| n_d[*z] += 1);

    let iterations = model.infer_iterations;
    let window = averaging_window(iterations);
    let mut theta = vec![0.0f64; k];
    let mut weights = vec![0.0f64; k];
    let denom = words.len() as f64 + k as f64 * alpha;
    for sweep in 0..iterations {
        for i in 0..words.len() {
            n_d[z_d[i]] -= 1;
            for z in 0..k {
                weights[z] = (f64::from(n_d[z]) + alpha) * phi[i][z];
            }
            let new = sample_index(&mut rng, &weights);
            z_d[i] = new;
            n_d[new] += 1;
        }
        if sweep + window >= iterations {
            for z in 0..k {
                theta[z] += (f64::from(n_d[z]) + alpha) / denom;
            }
        }
    }
    TopicDistribution {
        probs: normalize(theta),
        all_oov: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn single_topic_is_degenerate() {
        let docs = vec![toks("a b c"), toks("c d"), toks("e")];
        let cfg = LdaConfig { k: 1, iterations: 5, ..Default::default() };
        let (model, dists) = fit_lda(&docs, &cfg).unwrap();
        for d in &dists {
            assert_eq!(d.probs.len(), 1);
            assert!((d.probs[0] - 1.0).abs() < 1e-12);
        }
        assert_eq!(infer_doc_topics(&model, &toks("a d")).probs, vec![1.0]);
    }

    #[test]
    fn empty_vocabulary_is_an_error() {
        let docs = vec![vec![], vec![]];
        assert!(matches!(fit_lda(&docs, &LdaConfig::default()), Err(TopicError::EmptyCorpus)));
    }

    #[test]
    fn outputs_are_normalized_and_positive() {
        let docs = vec![toks("graph mining graph"), toks("neural network learning"), toks(""), toks("graph network")];
        let cfg = LdaConfig { k: 4, iterations: 20, ..Default::default() };
        let (model, dists) = fit_lda(&docs, &cfg).unwrap();
        for d in &dists {
            assert!((d.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(d.probs.iter().all(|p| *p > 0.0));
        }
        assert!(dists[2].all_oov);
        for z in 0..model.k {
            let row = model.topic_word(z);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(row.iter().all(|p| *p > 0.0));
        }
    }

    #[test]
    fn same_seed_same_model() {
        let docs = vec![toks("a b c a"), toks("c d e"), toks("e f a")];
        let cfg = LdaConfig { k: 3, iterations: 30, ..Default::default() };
        let (m1, d1) = fit_lda(&docs, &cfg).unwrap();
        let (m2, d2) = fit_lda(&docs, &cfg).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(d1, d2);
        let other = LdaConfig { seed: 7, ..cfg };
        let (m3, _) = fit_lda(&docs, &other).unwrap();
        assert_ne!(m1.topic_word_counts, m3.topic_word_counts);
    }

    #[test]
    fn all_oov_inference_is_uniform_and_flagged() {
        let docs = vec![toks("a b"), toks("c d")];
        let (model, _) = fit_lda(&docs, &LdaConfig { k: 4, iterations: 5, ..Default::default() }).unwrap();
        let d = infer_doc_topics(&model, &toks("zzz yyy"));
        assert!(d.all_oov);
        assert_eq!(d.probs, vec![0.25; 4]);
    }

    #[test]
    fn inference_is_deterministic() {
        let docs = vec![toks("a b c"), toks("c d e")];
        let (model, _) = fit_lda(&docs, &LdaConfig { k: 3, iterations: 10, ..Default::default() }).unwrap();
        let q = toks("a c e");
        assert_eq!(infer_doc_topics(&model, &q), infer_doc_topics(&model, &q));
    }
}
