use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn from_scores(scores: &[f64], labels: &[bool], threshold: f64) -> Self {
        let mut c = Confusion::default();
        for (s, l) in scores.iter().zip(labels) {
            match (*s >= threshold, *l) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Nothing was predicted positive, so precision was set to 0.
    pub no_predicted_positives: bool,
}

pub fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 }
}

impl From<Confusion> for ClassificationMetrics {
    fn from(c: Confusion) -> Self {
        let predicted = c.tp + c.fp;
        let actual = c.tp + c.fn_;
        let precision = if predicted > 0 { c.tp as f64 / predicted as f64 } else { 0.0 };
        let recall = if actual > 0 { c.tp as f64 / actual as f64 } else { 0.0 };
        let total = c.total();
        ClassificationMetrics {
            precision,
            recall,
            f1: harmonic_mean(precision, recall),
            accuracy: if total > 0 { (c.tp + c.tn) as f64 / total as f64 } else { 0.0 },
            no_predicted_positives: predicted == 0,
        }
    }
}

/// Confusion-matrix metrics with positives predicted at `score >= threshold`.
pub fn classification_metrics(scores: &[f64], labels: &[bool], threshold: f64) -> ClassificationMetrics {
    Confusion::from_scores(scores, labels, threshold).into()
}

/// Expected precision, recall and F1 of a coin-flip classifier on data with
/// positive rate `pi`.
pub fn random_expectation(pi: f64) -> (f64, f64, f64) {
    (pi, 0.5, harmonic_mean(pi, 0.5))
}

/// Mann-Whitney AUC using mid-ranks, so ties count one half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::Shape(format!("{} scores, {} labels", scores.len(), labels.len())));
    }
    let n_pos = labels.iter().filter(|l| **l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::Undefined("AUC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|a, b| scores[*a].total_cmp(&scores[*b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += order[i..=j].iter().filter(|k| labels[**k]).count() as f64 * mid;
        i = j + 1;
    }
    let np = n_pos as f64;
    Ok((rank_sum - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankingMetrics {
    pub pre_at_3: f64,
    pub map: f64,
    /// Authors with at least one positive paper.
    pub authors: usize,
}

/// Labels of one group ordered by descending score, ties by input order.
fn ranked(items: &[(f64, bool)]) -> Vec<bool> {
    let mut v: Vec<(usize, f64, bool)> = items.iter().enumerate().map(|(i, (s, l))| (i, *s, *l)).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter().map(|(_, _, l)| l).collect()
}

pub fn precision_at(ranked: &[bool], k: usize) -> f64 {
    let k = k.min(ranked.len());
    ranked[..k].iter().filter(|l| **l).count() as f64 / k as f64
}

pub fn average_precision(ranked: &[bool]) -> f64 {
    let mut hits = 0;
    let mut sum = 0.0;
    for (i, l) in ranked.iter().enumerate() {
        if *l {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    if hits == 0 { 0.0 } else { sum / hits as f64 }
}

/// Per-author Pre@3 and average precision, averaged over authors that have
/// at least one positive paper.
pub fn ranking_metrics<S: AsRef<str>>(authors: &[S], scores: &[f64], labels: &[bool]) -> Result<RankingMetrics, EvalError> {
    if authors.len() != scores.len() || scores.len() != labels.len() {
        return Err(EvalError::Shape("authors, scores and labels differ in length".into()));
    }
    let mut groups: BTreeMap<&str, Vec<(f64, bool)>> = BTreeMap::new();
    for ((a, s), l) in authors.iter().zip(scores).zip(labels) {
        groups.entry(a.as_ref()).or_default().push((*s, *l));
    }
    let (mut p3, mut ap, mut count) = (0.0, 0.0, 0usize);
    for items in groups.values() {
        if !items.iter().any(|(_, l)| *l) {
            continue;
        }
        let r = ranked(items);
        p3 += precision_at(&r, 3);
        ap += average_precision(&r);
        count += 1;
    }
    if count == 0 {
        return Err(EvalError::Undefined("no author has a positive paper".into()));
    }
    Ok(RankingMetrics {
        pre_at_3: p3 / count as f64,
        map: ap / count as f64,
        authors: count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    /// `None` when the truths are constant.
    pub r2: Option<f64>,
    pub mae: f64,
}

pub fn regression_metrics(predictions: &[f64], truths: &[f64]) -> Result<RegressionMetrics, EvalError> {
    if predictions.len() != truths.len() {
        return Err(EvalError::Shape(format!("{} predictions, {} truths", predictions.len(), truths.len())));
    }
    if truths.len() < 2 {
        return Err(EvalError::TooFew(truths.len()));
    }
    let n = truths.len() as f64;
    let mean = truths.iter().sum::<f64>() / n;
    let ss_tot: f64 = truths.iter().map(|t| (t - mean).powi(2)).sum();
    let ss_res: f64 = predictions.iter().zip(truths).map(|(p, t)| (t - p).powi(2)).sum();
    let mae = predictions.iter().zip(truths).map(|(p, t)| (t - p).abs()).sum::<f64>() / n;
    Ok(RegressionMetrics {
        r2: (ss_tot > 0.0).then(|| 1.0 - ss_res / ss_tot),
        mae,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_classifier() {
        let m = classification_metrics(&[0.9, 0.8, 0.1], &[true, true, false], 0.5);
        assert_eq!((m.precision, m.recall, m.f1, m.accuracy), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn no_positive_predictions_are_flagged() {
        let m = classification_metrics(&[0.1, 0.2], &[true, false], 0.5);
        assert!(m.no_predicted_positives);
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.f1, 0.0);
    }

    #[test]
    fn auc_extremes_and_ties() {
        let labels = [true, true, false, false];
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &labels).unwrap(), 1.0);
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &labels).unwrap(), 0.0);
        assert_eq!(auc(&[0.5; 4], &labels).unwrap(), 0.5);
        assert!(auc(&[0.5, 0.4], &[true, true]).is_err());
    }

    #[test]
    fn ranking_examples() {
        let r = ranking_metrics(&["a"; 3], &[0.9, 0.8, 0.7], &[true, true, false]).unwrap();
        assert!((r.pre_at_3 - 2.0 / 3.0).abs() < 1e-15);
        let r = ranking_metrics(&["a"; 3], &[0.9, 0.8, 0.7], &[true, false, true]).unwrap();
        assert!((r.map - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        assert!(ranking_metrics(&["a"], &[0.3], &[false]).is_err());
    }

    #[test]
    fn regression_examples() {
        let t = [1.0, 2.0, 3.0];
        let m = regression_metrics(&t, &t).unwrap();
        assert_eq!((m.r2, m.mae), (Some(1.0), 0.0));
        let m = regression_metrics(&[2.0; 3], &t).unwrap();
        assert_eq!(m.r2, Some(0.0));
        let m = regression_metrics(&[1.0, 3.0], &[2.0, 2.0]).unwrap();
        assert_eq!((m.r2, m.mae), (None, 1.0));
    }
}
