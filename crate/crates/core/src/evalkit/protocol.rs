use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{auc, classification_metrics, harmonic_mean, ranking_metrics};
use super::EvalError;
use crate::factorlab::{Dataset, DatasetSpec, FactorGroup, LabeledExample};
use crate::learners::Learner;
use crate::persist::derive_seed;

/// Shuffled index split; the training half gets the extra element when the
/// count is odd. Both halves are returned in ascending order.
pub fn split_indices(n: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    if n < 2 {
        return Err(EvalError::TooFew(n));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut test = idx.split_off(n.div_ceil(2));
    idx.sort_unstable();
    test.sort_unstable();
    Ok((idx, test))
}

pub fn split_half<T: Clone>(examples: &[T], seed: u64) -> Result<(Vec<T>, Vec<T>), EvalError> {
    let (a, b) = split_indices(examples.len(), seed)?;
    Ok((
        a.into_iter().map(|i| examples[i].clone()).collect(),
        b.into_iter().map(|i| examples[i].clone()).collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub run: usize,
    pub seed: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub auc: Option<f64>,
    pub pre_at_3: Option<f64>,
    pub map: Option<f64>,
    pub no_predicted_positives: bool,
}

/// Scores one test half.
pub fn evaluate_scores(run: usize, seed: u64, test: &[&LabeledExample], scores: &[f64], threshold: f64) -> RunMetrics {
    let labels: Vec<bool> = test.iter().map(|e| e.label).collect();
    let authors: Vec<&str> = test.iter().map(|e| e.primary_author.as_str()).collect();
    let c = classification_metrics(scores, &labels, threshold);
    let ranking = ranking_metrics(&authors, scores, &labels).ok();
    RunMetrics {
        run,
        seed,
        precision: c.precision,
        recall: c.recall,
        f1: c.f1,
        accuracy: c.accuracy,
        auc: auc(scores, &labels).ok(),
        pre_at_3: ranking.map(|r| r.pre_at_3),
        map: ranking.map(|r| r.map),
        no_predicted_positives: c.no_predicted_positives,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub stdev: f64,
    /// Runs where the metric was defined.
    pub n: usize,
}

impl MetricSummary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let stdev = if v.len() > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(MetricSummary { mean, stdev, n: v.len() })
    }
}

/// Means and sample standard deviations over runs. The F1 mean is the
/// harmonic mean of the mean precision and mean recall; its deviation is
/// taken over per-run F1 values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub precision: MetricSummary,
    pub recall: MetricSummary,
    pub f1: MetricSummary,
    pub accuracy: MetricSummary,
    pub auc: Option<MetricSummary>,
    pub pre_at_3: Option<MetricSummary>,
    pub map: Option<MetricSummary>,
}

impl Summary {
    fn of(runs: &[RunMetrics]) -> Self {
        let s = |f: fn(&RunMetrics) -> f64| MetricSummary::of(runs.iter().map(f)).expect("at least one run");
        let precision = s(|r| r.precision);
        let recall = s(|r| r.recall);
        let mut f1 = s(|r| r.f1);
        f1.mean = harmonic_mean(precision.mean, recall.mean);
        Summary {
            precision,
            recall,
            f1,
            accuracy: s(|r| r.accuracy),
            auc: MetricSummary::of(runs.iter().filter_map(|r| r.auc)),
            pre_at_3: MetricSummary::of(runs.iter().filter_map(|r| r.pre_at_3)),
            map: MetricSummary::of(runs.iter().filter_map(|r| r.map)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub learner: String,
    pub runs: usize,
    pub seed: u64,
    pub threshold: f64,
    pub spec: DatasetSpec,
    pub feature_names: Vec<String>,
    pub num_examples: usize,
    pub positive_rate: f64,
    pub per_run: Vec<RunMetrics>,
    pub summary: Summary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub runs: usize,
    pub seed: u64,
    pub threshold: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            runs: 10,
            seed: 2014,
            threshold: 0.5,
        }
    }
}

impl ProtocolConfig {
    /// Per-run seeds derived from the master seed.
    pub fn run_seeds(&self) -> Vec<u64> {
        (0..self.runs).map(|r| derive_seed(self.seed, r as u64)).collect()
    }
}

fn check_dataset(ds: &Dataset) -> Result<(), EvalError> {
    if ds.len() < 2 {
        return Err(EvalError::TooFew(ds.len()));
    }
    if ds.feature_names.is_empty() {
        return Err(EvalError::Schema("empty feature set".into()));
    }
    Ok(())
}

fn report(learner: String, ds: &Dataset, cfg: &ProtocolConfig, per_run: Vec<RunMetrics>) -> EvalReport {
    EvalReport {
        learner,
        runs: per_run.len(),
        seed: cfg.seed,
        threshold: cfg.threshold,
        spec: ds.spec.clone(),
        feature_names: ds.feature_names.clone(),
        num_examples: ds.len(),
        positive_rate: ds.positive_rate(),
        summary: Summary::of(&per_run),
        per_run,
    }
}

/// Repeated half-split evaluation with explicit per-run seeds. Each run
/// splits with `derive_seed(seed, 0)` and trains with `derive_seed(seed, 1)`.
pub fn run_protocol_with_seeds(
    ds: &Dataset,
    learner: &dyn Learner,
    seeds: &[u64],
    cfg: &ProtocolConfig,
) -> Result<EvalReport, EvalError> {
    check_dataset(ds)?;
    if seeds.is_empty() {
        return Err(EvalError::Schema("zero runs requested".into()));
    }
    let per_run: Vec<RunMetrics> = seeds
        .par_iter()
        .enumerate()
        .map(|(run, &seed)| {
            let (train, test) = split_indices(ds.len(), derive_seed(seed, 0))?;
            let x: Vec<Vec<f64>> = train.iter().map(|i| ds.examples[*i].factors.clone()).collect();
            let y: Vec<bool> = train.iter().map(|i| ds.examples[*i].label).collect();
            let model = learner
                .fit(&x, &y, &ds.feature_names, derive_seed(seed, 1))
                .map_err(|source| EvalError::Run { run, source })?;
            let test: Vec<&LabeledExample> = test.iter().map(|i| &ds.examples[*i]).collect();
            let scores = test
                .iter()
                .map(|e| model.score(&e.factors))
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|source| EvalError::Run { run, source })?;
            Ok(evaluate_scores(run, seed, &test, &scores, cfg.threshold))
        })
        .collect::<Result<_, EvalError>>()?;
    let mut cfg = *cfg;
    cfg.runs = seeds.len();
    Ok(report(learner.name(), ds, &cfg, per_run))
}

pub fn run_protocol(ds: &Dataset, learner: &dyn Learner, cfg: &ProtocolConfig) -> Result<EvalReport, EvalError> {
    run_protocol_with_seeds(ds, learner, &cfg.run_seeds(), cfg)
}

/// Uniform random scores on the same test halves `run_protocol` uses, so a
/// coin flip decides each positive prediction at threshold 0.5.
pub fn random_baseline(ds: &Dataset, cfg: &ProtocolConfig) -> Result<EvalReport, EvalError> {
    if ds.len() < 2 {
        return Err(EvalError::TooFew(ds.len()));
    }
    let per_run = cfg
        .run_seeds()
        .into_iter()
        .enumerate()
        .map(|(run, seed)| {
            let (_, test) = split_indices(ds.len(), derive_seed(seed, 0))?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2));
            let test: Vec<&LabeledExample> = test.iter().map(|i| &ds.examples[*i]).collect();
            let scores: Vec<f64> = test.iter().map(|_| rng.random::<f64>()).collect();
            Ok(evaluate_scores(run, seed, &test, &scores, 0.5))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(report("random".into(), ds, cfg, per_run))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JackknifeRow {
    pub group: String,
    pub features: Vec<String>,
    /// F1 trained on every feature outside the group.
    pub without_f1: Option<f64>,
    pub without_error: Option<String>,
    /// F1 trained on the group alone.
    pub with_only_f1: Option<f64>,
    pub with_only_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JackknifeReport {
    pub learner: String,
    pub runs: usize,
    pub seed: u64,
    pub spec: DatasetSpec,
    pub full_f1: f64,
    pub rows: Vec<JackknifeRow>,
}

/// Factor groups present in the dataset, keyed by group letter.
pub fn default_groups(ds: &Dataset) -> Vec<(String, Vec<String>)> {
    FactorGroup::ALL
        .iter()
        .filter_map(|g| {
            let members: Vec<String> = ds
                .feature_names
                .iter()
                .filter(|n| FactorGroup::of(n) == Some(*g))
                .cloned()
                .collect();
            (!members.is_empty()).then(|| (g.to_string(), members))
        })
        .collect()
}

/// Removes each group in turn, then uses each group alone. Every run of every
/// variant reuses the same seeds, so the variants see identical splits.
pub fn jackknife(
    ds: &Dataset,
    groups: &[(String, Vec<String>)],
    learner: &dyn Learner,
    cfg: &ProtocolConfig,
) -> Result<JackknifeReport, EvalError> {
    for (g, members) in groups {
        if let Some(bad) = members.iter().find(|m| !ds.feature_names.contains(m)) {
            return Err(EvalError::Schema(format!("group {g} names unknown factor {bad}")));
        }
    }
    let full = run_protocol(ds, learner, cfg)?;
    let f1_of = |names: Vec<String>| -> Result<f64, EvalError> {
        let sub = ds.select(&names).map_err(|e| EvalError::Schema(e.to_string()))?;
        Ok(run_protocol(&sub, learner, cfg)?.summary.f1.mean)
    };
    let split = |r: Result<f64, EvalError>| match r {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let rows = groups
        .iter()
        .map(|(g, members)| {
            let rest: Vec<String> = ds.feature_names.iter().filter(|n| !members.contains(n)).cloned().collect();
            let (without_f1, without_error) = split(f1_of(rest));
            let (with_only_f1, with_only_error) = split(f1_of(members.clone()));
            JackknifeRow {
                group: g.clone(),
                features: members.clone(),
                without_f1,
                without_error,
                with_only_f1,
                with_only_error,
            }
        })
        .collect();
    Ok(JackknifeReport {
        learner: learner.name(),
        runs: cfg.runs,
        seed: cfg.seed,
        spec: ds.spec.clone(),
        full_f1: full.summary.f1.mean,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_sizes_and_determinism() {
        let (a, b) = split_indices(10, 1).unwrap();
        assert_eq!((a.len(), b.len()), (5, 5));
        let (a, b) = split_indices(11, 1).unwrap();
        assert_eq!((a.len(), b.len()), (6, 5));
        assert_eq!(split_indices(11, 1).unwrap(), (a.clone(), b.clone()));
        let mut all: Vec<usize> = a.into_iter().chain(b).collect();
        all.sort_unstable();
        assert_eq!(all, (0..11).collect::<Vec<_>>());
        assert!(split_indices(1, 1).is_err());
    }

    #[test]
    fn summary_stdev_is_sample_based() {
        let s = MetricSummary::of([1.0, 3.0]).unwrap();
        assert_eq!((s.mean, s.stdev), (2.0, 2f64.sqrt()));
        assert_eq!(MetricSummary::of([4.0]).unwrap().stdev, 0.0);
    }
}
