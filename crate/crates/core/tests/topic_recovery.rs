use hforecast::topicmodel::{fit_lda, infer_doc_topics, LdaConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS_PER_TOPIC: usize = 20;

/// Documents drawn from three topics with disjoint vocabularies; each document
/// mixes mostly one topic with a little of the others.
fn generate(seed: u64) -> (Vec<Vec<String>>, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab: Vec<String> = (0..3 * WORDS_PER_TOPIC).map(|i| format!("w{i}")).collect();
    // Skewed word weights inside each topic.
    let truth: Vec<Vec<f64>> = (0..3)
        .map(|z| {
            let mut row = vec![0.0; vocab.len()];
            let weights: Vec<f64> = (0..WORDS_PER_TOPIC).map(|i| 1.0 / (1.0 + i as f64)).collect();
            let s: f64 = weights.iter().sum();
            for (i, w) in weights.iter().enumerate() {
                row[z * WORDS_PER_TOPIC + i] = w / s;
            }
            row
        })
        .collect();
    let mut docs = Vec::new();
    for d in 0..300 {
        let main = d % 3;
        let mut doc = Vec::new();
        for _ in 0..40 {
            let z = if rng.random::<f64>() < 0.9 { main } else { rng.random_range(0..3) };
            let mut u = rng.random::<f64>();
            let mut pick = z * WORDS_PER_TOPIC;
            for (w, p) in truth[z].iter().enumerate() {
                u -= p;
                if *p > 0.0 {
                    pick = w;
                }
                if u < 0.0 {
                    break;
                }
            }
            doc.push(vocab[pick].clone());
        }
        docs.push(doc);
    }
    (docs, truth)
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

#[test]
fn recovers_planted_topics() {
    let (docs, truth) = generate(11);
    let cfg = LdaConfig { k: 3, iterations: 200, seed: 5, ..Default::default() };
    let (model, _) = fit_lda(&docs, &cfg).unwrap();
    // Re-index learned rows into the generator's vocabulary order.
    let learned: Vec<Vec<f64>> = (0..3)
        .map(|z| {
            (0..3 * WORDS_PER_TOPIC)
                .map(|i| model.word_id(&format!("w{i}")).map_or(0.0, |w| model.phi(z, w as usize)))
                .collect()
        })
        .collect();
    let mut used = [false; 3];
    let mut total = 0.0;
    for t in &truth {
        let (best, sim) = (0..3)
            .filter(|z| !used[*z])
            .map(|z| (z, cosine(t, &learned[z])))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        used[best] = true;
        total += sim;
    }
    let mean = total / 3.0;
    assert!(mean >= 0.8, "mean aligned cosine {mean}");
}

#[test]
fn fold_in_matches_training_distribution() {
    let (docs, _) = generate(3);
    let cfg = LdaConfig { k: 3, iterations: 200, seed: 9, ..Default::default() };
    let (model, dists) = fit_lda(&docs, &cfg).unwrap();
    for (doc, trained) in docs.iter().zip(&dists).take(30) {
        let inferred = infer_doc_topics(&model, doc);
        let tv: f64 = inferred.probs.iter().zip(&trained.probs).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        assert!(tv <= 0.1, "total variation {tv}");
    }
}
