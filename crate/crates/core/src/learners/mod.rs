//! Regressors, classifiers and feature statistics.

mod bayes;
mod linear;
mod logistic;
mod stats;
mod trees;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use bayes::{fit_naive_bayes, NaiveBayesParams};
pub use linear::{fit_linear_regression, predict_linear, LinearParams, LinearPrediction};
pub use logistic::{fit_logistic_regression, logistic_objective, LogisticConfig, LogisticParams};
pub use stats::{information_gain_ratio, information_gain_ratio_binned, pearson_cc, BinningScheme};
pub use trees::{fit_tree_ensemble, Tree, TreeConfig, TreeNode};

use crate::persist::write_atomic;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("training labels contain a single class")]
    DegenerateLabels,
    #[error("feature schema mismatch: {0}")]
    Schema(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("undefined statistic: {0}")]
    Undefined(String),
    #[error("model is a {0}, not a {1}")]
    WrongKind(LearnerKind, &'static str),
    #[error("model file error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    LinearRegression,
    LogisticRegression,
    NaiveBayes,
    BaggedTrees,
    RandomForest,
}

impl LearnerKind {
    pub const CLASSIFIERS: [LearnerKind; 4] = [
        LearnerKind::LogisticRegression,
        LearnerKind::NaiveBayes,
        LearnerKind::BaggedTrees,
        LearnerKind::RandomForest,
    ];

    /// Short name used on the command line and in reports.
    pub fn short(self) -> &'static str {
        match self {
            LearnerKind::LinearRegression => "linear",
            LearnerKind::LogisticRegression => "lrc",
            LearnerKind::NaiveBayes => "nb",
            LearnerKind::BaggedTrees => "bag",
            LearnerKind::RandomForest => "rf",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

impl FromStr for LearnerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "linear" | "linear-regression" => LearnerKind::LinearRegression,
            "lrc" | "logistic-regression" => LearnerKind::LogisticRegression,
            "nb" | "naive-bayes" => LearnerKind::NaiveBayes,
            "bag" | "bagged-trees" => LearnerKind::BaggedTrees,
            "rf" | "random-forest" => LearnerKind::RandomForest,
            other => return Err(format!("unknown learner {other:?}; expected lrc, nb, bag, rf or linear")),
        })
    }
}

/// Per-feature z-scoring. Constant columns are flagged and mapped to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub constant: Vec<bool>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Result<Self, LearnerError> {
        let d = check_matrix(x)?;
        let n = x.len() as f64;
        let mut means = vec![0.0; d];
        for row in x {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = vec![0.0; d];
        for row in x {
            for j in 0..d {
                vars[j] += (row[j] - means[j]).powi(2);
            }
        }
        let stds: Vec<f64> = vars.iter().map(|v| (v / n).sqrt()).collect();
        let constant = stds
            .iter()
            .zip(&means)
            .map(|(s, m)| !(*s > 1e-12 * m.abs().max(1.0)))
            .collect();
        Ok(Standardizer { means, stds, constant })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, v)| if self.constant[j] { 0.0 } else { (v - self.means[j]) / self.stds[j] })
            .collect()
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|r| self.transform_row(r)).collect()
    }

    /// Indices of non-constant features.
    pub fn active(&self) -> Vec<usize> {
        (0..self.dim()).filter(|j| !self.constant[*j]).collect()
    }
}

/// Row count > 0 and all rows the same width; returns the width.
fn check_matrix(x: &[Vec<f64>]) -> Result<usize, LearnerError> {
    let d = x.first().map(Vec::len).ok_or_else(|| LearnerError::Shape("no training rows".into()))?;
    if let Some((i, r)) = x.iter().enumerate().find(|(_, r)| r.len() != d) {
        return Err(LearnerError::Shape(format!("row {i} has {} columns, expected {d}", r.len())));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(LearnerError::Shape("non-finite feature value".into()));
    }
    Ok(d)
}

fn check_labels(x: &[Vec<f64>], y: &[bool]) -> Result<(), LearnerError> {
    if x.len() != y.len() {
        return Err(LearnerError::Shape(format!("{} rows but {} labels", x.len(), y.len())));
    }
    let pos = y.iter().filter(|v| **v).count();
    if pos == 0 || pos == y.len() {
        return Err(LearnerError::DegenerateLabels);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ModelParams {
    Linear(LinearParams),
    Logistic(LogisticParams),
    NaiveBayes(NaiveBayesParams),
    Trees { trees: Vec<Tree> },
}

pub const MODEL_FORMAT: &str = "hforecast-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A fitted model with everything needed to score new rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format: String,
    pub version: u32,
    pub kind: LearnerKind,
    pub feature_names: Vec<String>,
    pub standardization: Standardizer,
    pub seed: u64,
    pub params: ModelParams,
    /// Configuration of the run that produced the model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_config: Option<serde_json::Value>,
}

impl TrainedModel {
    fn new(
        kind: LearnerKind,
        feature_names: &[String],
        standardization: Standardizer,
        seed: u64,
        params: ModelParams,
    ) -> Result<Self, LearnerError> {
        if feature_names.len() != standardization.dim() {
            return Err(LearnerError::Schema(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                standardization.dim()
            )));
        }
        Ok(TrainedModel {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_FORMAT_VERSION,
            kind,
            feature_names: feature_names.to_vec(),
            standardization,
            seed,
            params,
            run_config: None,
        })
    }

    pub fn with_run_config(mut self, config: serde_json::Value) -> Self {
        self.run_config = Some(config);
        self
    }

    /// Hex SHA-256 of the serialized model.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    /// Short version tag, stable for a given model file.
    pub fn version_tag(&self) -> String {
        format!("{}-{}", self.kind.short(), &self.fingerprint()[..12])
    }

    fn check_row(&self, row: &[f64]) -> Result<(), LearnerError> {
        if row.len() != self.feature_names.len() {
            return Err(LearnerError::Schema(format!(
                "model expects {} features, got {}",
                self.feature_names.len(),
                row.len()
            )));
        }
        Ok(())
    }

    /// Refuses rows whose feature names differ from the training schema.
    pub fn check_schema<S: AsRef<str>>(&self, names: &[S]) -> Result<(), LearnerError> {
        if names.len() != self.feature_names.len()
            || names.iter().zip(&self.feature_names).any(|(a, b)| a.as_ref() != b)
        {
            let got: Vec<&str> = names.iter().map(AsRef::as_ref).collect();
            return Err(LearnerError::Schema(format!(
                "expected [{}], got [{}]",
                self.feature_names.join(", "),
                got.join(", ")
            )));
        }
        Ok(())
    }

    /// Positive-class probability.
    pub fn predict_proba(&self, row: &[f64]) -> Result<f64, LearnerError> {
        self.check_row(row)?;
        match &self.params {
            ModelParams::Logistic(p) => Ok(p.proba(&self.standardization.transform_row(row))),
            ModelParams::NaiveBayes(p) => Ok(p.proba(&self.standardization.transform_row(row))),
            ModelParams::Trees { trees } => Ok(trees.iter().map(|t| t.predict(row)).sum::<f64>() / trees.len() as f64),
            ModelParams::Linear(_) => Err(LearnerError::WrongKind(self.kind, "classifier")),
        }
    }

    /// Unclipped regression score.
    pub fn predict_value(&self, row: &[f64]) -> Result<f64, LearnerError> {
        self.check_row(row)?;
        match &self.params {
            ModelParams::Linear(p) => Ok(p.score(&self.standardization.transform_row(row))),
            _ => Err(LearnerError::WrongKind(self.kind, "regressor")),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LearnerError> {
        let model: TrainedModel = serde_json::from_str(text).map_err(|e| LearnerError::Format(e.to_string()))?;
        if model.format != MODEL_FORMAT {
            return Err(LearnerError::Format(format!("not a model file ({})", model.format)));
        }
        if model.version != MODEL_FORMAT_VERSION {
            return Err(LearnerError::Format(format!("unsupported model version {}", model.version)));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), LearnerError> {
        write_atomic(path, self.to_json().as_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, LearnerError> {
        TrainedModel::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Scores rows with a positive-class probability.
pub trait Scorer: Send + Sync {
    fn score(&self, row: &[f64]) -> Result<f64, LearnerError>;
}

impl Scorer for TrainedModel {
    fn score(&self, row: &[f64]) -> Result<f64, LearnerError> {
        self.predict_proba(row)
    }
}

/// A trainable binary classifier. Implement this to plug in learners beyond
/// the built-in ones.
pub trait Learner: Send + Sync {
    fn name(&self) -> String;
    fn fit(&self, x: &[Vec<f64>], y: &[bool], feature_names: &[String], seed: u64)
        -> Result<Box<dyn Scorer>, LearnerError>;
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub logistic: LogisticConfig,
    pub trees: TreeConfig,
}

/// One of the built-in classifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinLearner {
    pub kind: LearnerKind,
    pub config: LearnerConfig,
}

impl BuiltinLearner {
    pub fn new(kind: LearnerKind) -> Self {
        BuiltinLearner {
            kind,
            config: LearnerConfig::default(),
        }
    }

    pub fn train(&self, x: &[Vec<f64>], y: &[bool], names: &[String], seed: u64) -> Result<TrainedModel, LearnerError> {
        match self.kind {
            LearnerKind::LogisticRegression => fit_logistic_regression(x, y, names, &self.config.logistic),
            LearnerKind::NaiveBayes => fit_naive_bayes(x, y, names),
            LearnerKind::BaggedTrees | LearnerKind::RandomForest => {
                fit_tree_ensemble(x, y, names, self.kind, &self.config.trees, seed)
            }
            LearnerKind::LinearRegression => Err(LearnerError::WrongKind(self.kind, "classifier")),
        }
    }
}

impl Learner for BuiltinLearner {
    fn name(&self) -> String {
        self.kind.short().to_string()
    }

    fn fit(&self, x: &[Vec<f64>], y: &[bool], names: &[String], seed: u64) -> Result<Box<dyn Scorer>, LearnerError> {
        Ok(Box::new(self.train(x, y, names, seed)?))
    }
}
