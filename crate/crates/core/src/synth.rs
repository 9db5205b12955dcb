//! Seeded generator for small AMiner-style corpora with planted structure:
//! topical vocabularies, venues of varying quality, author talent, and
//! preferential attachment in both co-authorship and citation.

use std::collections::{HashMap, HashSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::corpus::{RawPaper, Year};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub num_authors: usize,
    pub num_papers: usize,
    pub first_year: Year,
    pub last_year: Year,
    pub num_topics: usize,
    pub words_per_topic: usize,
    pub num_venues: usize,
    pub min_refs: usize,
    pub max_refs: usize,
    /// Per-year decay of a paper's attractiveness as a reference.
    pub recency: f64,
    /// Exponent on paper appeal when choosing references.
    pub appeal_exponent: f64,
    /// Exponent on an author's paper count when choosing lead authors.
    pub lead_exponent: f64,
    /// Half-width of the multiplicative noise on paper quality.
    pub quality_noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_authors: 500,
            num_papers: 3000,
            first_year: 1990,
            last_year: 2012,
            num_topics: 8,
            words_per_topic: 40,
            num_venues: 16,
            min_refs: 8,
            max_refs: 20,
            recency: 0.6,
            appeal_exponent: 2.5,
            lead_exponent: 0.25,
            quality_noise: 0.3,
            seed: 2014,
        }
    }
}

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ne", "ru", "sa", "te", "vo", "zi", "pa", "do", "gri", "fen", "mar", "tol", "bes", "qui", "nor",
    "hal", "cy", "dra", "wen", "os", "lum", "ter", "pix", "sol", "van", "bri", "del",
];

const GENERIC: &[&str] = &[
    "method", "approach", "results", "analysis", "model", "system", "framework", "evaluation", "study", "novel",
    "efficient", "scalable", "problem", "algorithm", "experiments", "data", "performance", "proposed", "paper",
    "technique",
];

fn pseudo_word(rng: &mut ChaCha8Rng, syllables: usize) -> String {
    (0..syllables).map(|_| *SYLLABLES.choose(rng).unwrap()).collect()
}

fn unique_words(rng: &mut ChaCha8Rng, n: usize, syllables: usize, taken: &mut HashSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w = pseudo_word(rng, syllables);
        if taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map(|f| f.to_uppercase().collect::<String>() + c.as_str())
        .unwrap_or_default()
}

/// Index drawn with probability proportional to `weights`.
fn weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        u -= w;
        if u < 0.0 {
            return i;
        }
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Zipf-like draw of a rank in `0..n`.
fn zipf(rng: &mut ChaCha8Rng, n: usize) -> usize {
    let u: f64 = rng.random();
    (((n as f64 + 1.0).powf(u) - 1.0) as usize).min(n - 1)
}

struct Author {
    name: String,
    talent: f64,
    home: usize,
    second: usize,
    start: Year,
    papers: usize,
    topic_papers: Vec<usize>,
    coauthors: HashMap<usize, usize>,
}

struct Venue {
    name: String,
    quality: f64,
    focus: usize,
}

struct Meta {
    year: Year,
    topic: usize,
    appeal: f64,
    cites: f64,
}

/// Generates the corpus. Identical configs give identical output.
pub fn generate(cfg: &SynthConfig) -> Vec<RawPaper> {
    assert!(cfg.num_topics >= 2 && cfg.num_authors >= 2 && cfg.last_year > cfg.first_year + 3);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut taken: HashSet<String> = GENERIC.iter().map(|s| s.to_string()).collect();
    let topics: Vec<Vec<String>> = (0..cfg.num_topics)
        .map(|_| unique_words(&mut rng, cfg.words_per_topic, 3, &mut taken))
        .collect();

    let venue_words = unique_words(&mut rng, cfg.num_venues, 2, &mut taken);
    let venues: Vec<Venue> = venue_words
        .iter()
        .enumerate()
        .map(|(i, w)| Venue {
            name: format!("{} {}", if i % 3 == 0 { "Journal of" } else { "Conference on" }, capitalize(w)),
            quality: rng.random_range(0.1..1.0),
            focus: i % cfg.num_topics,
        })
        .collect();

    let talent_dist = LogNormal::new(0.0, 0.6).unwrap();
    let span = (cfg.last_year - cfg.first_year - 3) as f64;
    let mut names = HashSet::new();
    let mut authors: Vec<Author> = (0..cfg.num_authors)
        .map(|_| {
            let name = loop {
                let n = format!("{} {}", capitalize(&pseudo_word(&mut rng, 2)), capitalize(&pseudo_word(&mut rng, 3)));
                if names.insert(n.clone()) {
                    break n;
                }
            };
            let home = rng.random_range(0..cfg.num_topics);
            let second = (home + rng.random_range(1..cfg.num_topics)) % cfg.num_topics;
            Author {
                name,
                talent: talent_dist.sample(&mut rng),
                home,
                second,
                start: cfg.first_year + (span * rng.random::<f64>().powf(0.8)) as Year,
                papers: 0,
                topic_papers: vec![0; cfg.num_topics],
                coauthors: HashMap::new(),
            }
        })
        .collect();
    // The earliest year always has someone to write.
    authors[0].start = cfg.first_year;

    let years: Vec<Year> = (cfg.first_year..=cfg.last_year).collect();
    let growth: Vec<f64> = years.iter().map(|y| (0.12 * f64::from(y - cfg.first_year)).exp()).collect();
    let total: f64 = growth.iter().sum();
    let mut per_year: Vec<usize> = growth.iter().map(|g| (g / total * cfg.num_papers as f64) as usize).collect();
    let short = cfg.num_papers - per_year.iter().sum::<usize>();
    let last = per_year.len() - 1;
    per_year[last] += short;

    let mut papers: Vec<RawPaper> = Vec::with_capacity(cfg.num_papers);
    let mut meta: Vec<Meta> = Vec::with_capacity(cfg.num_papers);
    let mut external = 0usize;

    for (&year, &count) in years.iter().zip(&per_year) {
        let first_of_year = papers.len();
        let active: Vec<usize> = (0..authors.len()).filter(|a| authors[*a].start <= year).collect();
        for _ in 0..count {
            let lead_w: Vec<f64> = active
                .iter()
                .map(|a| authors[*a].talent * (1.0 + authors[*a].papers as f64).powf(cfg.lead_exponent))
                .collect();
            let lead = active[weighted(&mut rng, &lead_w)];
            let mut team = vec![lead];
            let extra = weighted(&mut rng, &[0.2, 0.35, 0.3, 0.15]);
            for _ in 0..extra {
                let known: Vec<(usize, usize)> = authors[lead]
                    .coauthors
                    .iter()
                    .map(|(k, v)| (*k, *v))
                    .filter(|(k, _)| !team.contains(k) && authors[*k].start <= year)
                    .collect();
                let pick = if !known.is_empty() && rng.random::<f64>() < 0.6 {
                    let mut known = known;
                    known.sort_unstable();
                    let w: Vec<f64> = known.iter().map(|(_, c)| *c as f64).collect();
                    known[weighted(&mut rng, &w)].0
                } else {
                    let w: Vec<f64> = active
                        .iter()
                        .map(|a| if team.contains(a) { 0.0 } else { 1.0 + authors[*a].coauthors.len() as f64 })
                        .collect();
                    if w.iter().all(|x| *x == 0.0) {
                        break;
                    }
                    active[weighted(&mut rng, &w)]
                };
                team.push(pick);
            }
            // Occasionally a senior co-author is listed last.
            if team.len() > 2 && rng.random::<f64>() < 0.3 {
                team.rotate_left(1);
            }

            let lead_a = &authors[lead];
            let roll: f64 = rng.random();
            let topic = if roll < 0.7 {
                lead_a.home
            } else if roll < 0.9 {
                lead_a.second
            } else {
                rng.random_range(0..cfg.num_topics)
            };
            let side = rng.random_range(0..cfg.num_topics);
            let expertise: f64 = team.iter().map(|a| authors[*a].topic_papers[topic] as f64).sum();
            let talent = team.iter().map(|a| authors[*a].talent).fold(0.0, f64::max);
            let quality = talent * (1.0 + 0.15 * expertise).min(4.0) * rng.random_range(1.0 - cfg.quality_noise..=1.0 + cfg.quality_noise);
            let q_norm = quality / (quality + 1.5);
            let vw: Vec<f64> = venues
                .iter()
                .map(|v| (-(v.quality - q_norm).powi(2) / 0.04).exp() * if v.focus == topic { 2.0 } else { 1.0 } + 1e-6)
                .collect();
            let venue = weighted(&mut rng, &vw);
            let appeal = quality * (0.3 + venues[venue].quality);

            let word = |rng: &mut ChaCha8Rng| -> String {
                let r: f64 = rng.random();
                if r < 0.15 {
                    GENERIC.choose(rng).unwrap().to_string()
                } else {
                    let z = if r < 0.8 { topic } else { side };
                    topics[z][zipf(rng, cfg.words_per_topic)].clone()
                }
            };
            let title_len = rng.random_range(4..9);
            let title_words: Vec<String> = (0..title_len).map(|_| word(&mut rng)).collect();
            let title = capitalize(&title_words.join(" "));
            let abstract_text = if rng.random::<f64>() < 0.03 {
                String::new()
            } else {
                let n = rng.random_range(30..70);
                (0..n).map(|_| word(&mut rng)).collect::<Vec<_>>().join(" ")
            };

            let mut refs: Vec<String> = Vec::new();
            let pool = first_of_year;
            if pool > 0 {
                let k = rng.random_range(cfg.min_refs..=cfg.max_refs).min(pool);
                let mut w: Vec<f64> = meta[..pool]
                    .iter()
                    .map(|m| {
                        (m.cites + 1.0)
                            * m.appeal.powf(cfg.appeal_exponent)
                            * if m.topic == topic { 4.0 } else { 1.0 }
                            * cfg.recency.powi(year - m.year)
                    })
                    .collect();
                for _ in 0..k {
                    let r = weighted(&mut rng, &w);
                    if w[r] == 0.0 {
                        break;
                    }
                    w[r] = 0.0;
                    refs.push(papers[r].paper_id.clone());
                }
            }
            if rng.random::<f64>() < 0.02 {
                external += 1;
                refs.push(format!("ext{external:04}"));
            }

            let id = format!("p{:04}", papers.len() + 1);
            let author_names: Vec<String> = team.iter().map(|a| authors[*a].name.clone()).collect();
            papers.push(
                RawPaper::new(id, year)
                    .title(title)
                    .abstract_text(abstract_text)
                    .authors(&author_names)
                    .venue(venues[venue].name.clone())
                    .cites(&refs),
            );
            meta.push(Meta {
                year,
                topic,
                appeal,
                cites: 0.0,
            });
            for (i, a) in team.iter().enumerate() {
                authors[*a].papers += 1;
                authors[*a].topic_papers[topic] += 1;
                for b in &team[i + 1..] {
                    *authors[*a].coauthors.entry(*b).or_insert(0) += 1;
                    *authors[*b].coauthors.entry(*a).or_insert(0) += 1;
                }
            }
        }
        // Citations become visible to attachment from the next year on.
        for p in &papers[first_of_year..] {
            for r in &p.references {
                if let Some(idx) = r.strip_prefix('p').and_then(|n| n.parse::<usize>().ok()) {
                    meta[idx - 1].cites += 1.0;
                }
            }
        }
    }
    papers
}
