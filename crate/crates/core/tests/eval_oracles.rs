use std::collections::BTreeMap;

use hforecast::evalkit::*;
use hforecast::factorlab::{Dataset, DatasetSpec, LabeledExample};
use hforecast::learners::{BuiltinLearner, LearnerKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dataset(names: &[&str], rows: Vec<(Vec<f64>, bool)>, authors: usize) -> Dataset {
    Dataset {
        spec: DatasetSpec::default(),
        feature_names: names.iter().map(|s| s.to_string()).collect(),
        examples: rows
            .into_iter()
            .enumerate()
            .map(|(i, (factors, label))| LabeledExample {
                paper_id: format!("p{i:05}"),
                primary_author: format!("a{}", i % authors),
                factors,
                label,
                future_h: 1.0,
                future_citations: label as u32,
            })
            .collect(),
    }
}

/// Feature C-signal carries the label; the others are noise.
fn content_only(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| {
            let label = rng.random::<f64>() < 0.3;
            let signal = if label { 2.0 } else { -2.0 } + rng.random_range(-1.0..1.0);
            (
                vec![rng.random::<f64>(), signal, rng.random::<f64>(), rng.random::<f64>()],
                label,
            )
        })
        .collect();
    dataset(&["A-noise", "C-signal", "V-noise", "S-noise"], rows, 40)
}

fn assert_f1_consistent(r: &EvalReport) {
    for run in &r.per_run {
        assert!((run.f1 - harmonic_mean(run.precision, run.recall)).abs() < 1e-12);
    }
    let s = &r.summary;
    assert!((s.f1.mean - harmonic_mean(s.precision.mean, s.recall.mean)).abs() < 1e-12);
}

#[test]
fn random_row_f1_from_base_rate() {
    let (p, r, f1) = random_expectation(0.2107);
    assert_eq!((p, r), (0.2107, 0.5));
    assert!((f1 - 0.2965).abs() < 5e-5, "{f1}");
}

#[test]
fn separable_dataset_gives_high_f1_with_lrc() {
    let ds = content_only(400, 1);
    let r = run_protocol(&ds, &BuiltinLearner::new(LearnerKind::LogisticRegression), &ProtocolConfig::default()).unwrap();
    assert_eq!(r.runs, 10);
    assert!(r.summary.f1.mean >= 0.95, "{}", r.summary.f1.mean);
    assert_f1_consistent(&r);
}

#[test]
fn identical_seeds_give_zero_spread_and_reruns_reproduce() {
    let ds = content_only(200, 2);
    let learner = BuiltinLearner::new(LearnerKind::RandomForest);
    let cfg = ProtocolConfig::default();
    let r = run_protocol_with_seeds(&ds, &learner, &[77, 77], &cfg).unwrap();
    assert_eq!(r.summary.f1.stdev, 0.0);
    assert_eq!(r.summary.precision.stdev, 0.0);
    let a = run_protocol(&ds, &learner, &cfg).unwrap();
    let b = run_protocol(&ds, &learner, &cfg).unwrap();
    assert_eq!(a, b);
    assert_f1_consistent(&a);
}

#[test]
fn random_baseline_tracks_expectation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows = (0..6000).map(|_| (vec![0.0], rng.random::<f64>() < 0.2107)).collect();
    let ds = dataset(&["A-x"], rows, 1000);
    let r = random_baseline(&ds, &ProtocolConfig::default()).unwrap();
    let s = &r.summary;
    assert!((s.precision.mean - ds.positive_rate()).abs() < 0.02, "{}", s.precision.mean);
    assert!((s.recall.mean - 0.5).abs() < 0.03, "{}", s.recall.mean);
    assert!((s.f1.mean - 0.2965).abs() < 0.02, "{}", s.f1.mean);
    assert!((s.auc.unwrap().mean - 0.5).abs() < 0.03);
    assert_f1_consistent(&r);
}

#[test]
fn jackknife_isolates_informative_group() {
    let ds = content_only(300, 4);
    let learner = BuiltinLearner::new(LearnerKind::LogisticRegression);
    let cfg = ProtocolConfig { runs: 3, ..Default::default() };
    let groups = default_groups(&ds);
    assert_eq!(groups.len(), 4);
    let r = jackknife(&ds, &groups, &learner, &cfg).unwrap();
    let c = r.rows.iter().find(|row| row.group == "C").unwrap();
    assert!((c.with_only_f1.unwrap() - r.full_f1).abs() < 0.05);
    for row in r.rows.iter().filter(|row| row.group != "C") {
        assert!(row.with_only_f1.unwrap_or(0.0) < r.full_f1 - 0.3, "{}", row.group);
    }
    assert!(c.without_f1.unwrap() < r.full_f1 - 0.3);
    assert!(jackknife_table(&r).contains("content"));
}

#[test]
fn jackknife_single_group_partition() {
    let ds = content_only(120, 5);
    let learner = BuiltinLearner::new(LearnerKind::NaiveBayes);
    let cfg = ProtocolConfig { runs: 2, ..Default::default() };
    let all = vec![("ALL".to_string(), ds.feature_names.clone())];
    let r = jackknife(&ds, &all, &learner, &cfg).unwrap();
    assert!(r.rows[0].without_f1.is_none());
    assert!(r.rows[0].without_error.is_some());
    assert_eq!(r.rows[0].with_only_f1, Some(r.full_f1));
    let bad = vec![("X".to_string(), vec!["X-missing".to_string()])];
    assert!(matches!(jackknife(&ds, &bad, &learner, &cfg), Err(EvalError::Schema(_))));
}

#[test]
fn correlation_and_igr_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 500;
    let rows = (0..n)
        .map(|_| {
            let label = rng.random::<f64>() < 0.4;
            (vec![label as u8 as f64, rng.random::<f64>(), 7.0], label)
        })
        .collect();
    let ds = dataset(&["A-copy", "B-noise", "C-const"], rows, 50);
    let cc = label_correlations(&ds);
    assert!((cc[0].cc.unwrap() - 1.0).abs() < 1e-12);
    assert!(cc[1].cc.unwrap().abs() <= 3.0 / (n as f64).sqrt());
    assert!(cc[2].cc.is_none());
    assert!(correlation_text(&cc).contains("undefined"));

    let igr = igr_table(&ds, 10);
    assert_eq!(igr[0].factor, "A-copy");
    assert_eq!(igr[0].rank, 1);
    assert!((igr[0].igr - 1.0).abs() < 1e-12);
    let last = igr.last().unwrap();
    assert_eq!((last.factor.as_str(), last.igr), ("C-const", 0.0));
}

#[test]
fn ranking_is_perfect_when_positives_lead() {
    let authors = ["a", "a", "a", "b", "b", "c"];
    let labels = [true, false, false, true, true, false];
    let scores = [0.9, 0.2, 0.1, 0.8, 0.7, 0.3];
    let r = ranking_metrics(&authors, &scores, &labels).unwrap();
    assert_eq!(r.map, 1.0);
    assert_eq!(r.authors, 2);
    assert!((r.pre_at_3 - (1.0 / 3.0 + 1.0) / 2.0).abs() < 1e-15);
}

fn pair_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, li) in labels.iter().enumerate() {
        for (j, lj) in labels.iter().enumerate() {
            if *li && !*lj {
                pairs += 1.0;
                wins += if scores[i] > scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    wins / pairs
}

proptest! {
    #[test]
    fn auc_matches_pair_counting(cells in proptest::collection::vec((0u8..20, any::<bool>()), 2..300)) {
        let scores: Vec<f64> = cells.iter().map(|c| f64::from(c.0) / 20.0).collect();
        let labels: Vec<bool> = cells.iter().map(|c| c.1).collect();
        prop_assume!(labels.iter().any(|l| *l) && labels.iter().any(|l| !*l));
        let a = auc(&scores, &labels).unwrap();
        prop_assert!((a - pair_auc(&scores, &labels)).abs() < 1e-12);
    }

    #[test]
    fn confusion_metrics_match_counting(cells in proptest::collection::vec((0.0f64..1.0, any::<bool>()), 1..100)) {
        let scores: Vec<f64> = cells.iter().map(|c| c.0).collect();
        let labels: Vec<bool> = cells.iter().map(|c| c.1).collect();
        let m = classification_metrics(&scores, &labels, 0.5);
        let tp = cells.iter().filter(|c| c.0 >= 0.5 && c.1).count() as f64;
        let fp = cells.iter().filter(|c| c.0 >= 0.5 && !c.1).count() as f64;
        let fnn = cells.iter().filter(|c| c.0 < 0.5 && c.1).count() as f64;
        let tn = cells.len() as f64 - tp - fp - fnn;
        let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let r = if tp + fnn > 0.0 { tp / (tp + fnn) } else { 0.0 };
        prop_assert_eq!(m.precision, p);
        prop_assert_eq!(m.recall, r);
        prop_assert_eq!(m.accuracy, (tp + tn) / cells.len() as f64);
        prop_assert!((m.f1 - harmonic_mean(p, r)).abs() < 1e-12);
        prop_assert_eq!(m.no_predicted_positives, tp + fp == 0.0);
    }

    #[test]
    fn ranking_matches_per_author_brute_force(cells in proptest::collection::vec((0usize..5, 0u16..1000, any::<bool>()), 1..60)) {
        let authors: Vec<String> = cells.iter().map(|c| format!("a{}", c.0)).collect();
        let scores: Vec<f64> = cells.iter().map(|c| f64::from(c.1)).collect();
        let labels: Vec<bool> = cells.iter().map(|c| c.2).collect();
        let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, a) in authors.iter().enumerate() {
            groups.entry(a).or_default().push(i);
        }
        let (mut p3, mut ap, mut q) = (0.0, 0.0, 0.0);
        for idx in groups.values() {
            let mut idx = idx.clone();
            idx.sort_by(|a, b| scores[*b].total_cmp(&scores[*a]).then(a.cmp(b)));
            let npos = idx.iter().filter(|i| labels[**i]).count();
            if npos == 0 {
                continue;
            }
            q += 1.0;
            let top = idx.len().min(3);
            p3 += idx[..top].iter().filter(|i| labels[**i]).count() as f64 / top as f64;
            let mut sum = 0.0;
            for k in 0..idx.len() {
                if labels[idx[k]] {
                    let hits = idx[..=k].iter().filter(|i| labels[**i]).count();
                    sum += hits as f64 / (k + 1) as f64;
                }
            }
            ap += sum / npos as f64;
        }
        let got = ranking_metrics(&authors, &scores, &labels);
        if q == 0.0 {
            prop_assert!(got.is_err());
        } else {
            let got = got.unwrap();
            prop_assert!((got.pre_at_3 - p3 / q).abs() < 1e-12);
            prop_assert!((got.map - ap / q).abs() < 1e-12);
        }
    }

    #[test]
    fn regression_metrics_match_formula(pairs in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..50)) {
        let pred: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let truth: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let m = regression_metrics(&pred, &truth).unwrap();
        let n = truth.len() as f64;
        let mean = truth.iter().sum::<f64>() / n;
        let tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
        let res: f64 = pred.iter().zip(&truth).map(|(p, t)| (t - p) * (t - p)).sum();
        let mae = pred.iter().zip(&truth).map(|(p, t)| (t - p).abs()).sum::<f64>() / n;
        prop_assert!((m.mae - mae).abs() < 1e-12);
        if tot > 0.0 {
            prop_assert!((m.r2.unwrap() - (1.0 - res / tot)).abs() < 1e-9);
        }
    }
}
