//! Command-line pipeline: ingest, snapshot, topics, graph, featurize,
//! train, evaluate, analyze and serve.

mod commands;
mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hforecast::factorlab::{DatasetSpec, FutureHSource, PaperSet, PrimaryMode, RatioMode};
use hforecast::learners::LearnerKind;
use hforecast::pipeline::PipelineConfig;
use hforecast::topicmodel::{LdaConfig, TrainingScope};

pub use commands::{run, RunConfig};
pub use error::CliError;

/// Environment variable that overrides the cache directory.
pub const CACHE_DIR_ENV: &str = "HFORECAST_CACHE_DIR";

#[derive(Debug, Parser)]
#[command(name = "hforecast", version, about = "Future h-index and paper-contribution prediction")]
pub struct Cli {
    /// Directory holding the corpus cache, topic models, datasets and models.
    #[arg(long, global = true, env = CACHE_DIR_ENV, default_value = ".hforecast")]
    pub cache_dir: PathBuf,
    /// Worker threads for featurization, ensembles and evaluation runs.
    /// Defaults to the number of cores.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse an AMiner corpus file and write the binary cache.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Report corpus defects (dangling references, missing fields).
    Validate {
        /// Validate this file instead of the cached corpus.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Summary of the corpus visible at year t.
    Snapshot {
        #[arg(long, default_value_t = 2007)]
        t: i32,
    },
    /// Fit the topic model for snapshot year t.
    Topics(TopicsArgs),
    /// Build the collaboration graph and PageRank at year t.
    Graph {
        #[arg(long, default_value_t = 2007)]
        t: i32,
    },
    /// Build a labeled dataset and write it as CSV.
    Featurize(SpecArgs),
    /// Fit the future h-index regressor.
    TrainHindex {
        #[arg(long, default_value_t = 2007)]
        t: i32,
        #[arg(long, default_value_t = 5)]
        dt: u32,
        /// Minimum h-index at t for training authors.
        #[arg(long, default_value_t = 0)]
        min_h: u32,
        /// Held-out half-split runs for the R² estimate.
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[arg(long, default_value_t = 2014)]
        seed: u64,
    },
    /// Fit a paper-contribution classifier on the full dataset.
    TrainImpact {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_parser = parse_learner, default_value = "lrc")]
        learner: LearnerKind,
        #[arg(long, default_value_t = 2014)]
        seed: u64,
    },
    /// Featurize, then train and evaluate learners over repeated half splits.
    Experiment {
        #[command(flatten)]
        spec: SpecArgs,
        /// Learners to evaluate; repeat the flag for several. Defaults to all.
        #[arg(long = "learner", value_parser = parse_learner)]
        learners: Vec<LearnerKind>,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Per-group ablation: F1 without each factor group and with it alone.
    Jackknife {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_parser = parse_learner, default_value = "lrc")]
        learner: LearnerKind,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Information gain ratio of every factor, ranked.
    Igr {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 10)]
        bins: usize,
    },
    /// Pearson correlation of factors with the label or with future h-index.
    Correlate {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_enum, default_value_t = TargetArg::Label)]
        target: TargetArg,
        /// Bins for the factor response curves written alongside.
        #[arg(long, default_value_t = 10)]
        bins: usize,
    },
    /// Citation and h-index distributions at year t.
    Stats {
        #[arg(long, default_value_t = 2007)]
        t: i32,
        #[arg(long, default_value_t = 50)]
        paper_threshold: u32,
        #[arg(long, default_value_t = 60)]
        h_threshold: u32,
    },
    /// Serve the prediction API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: std::net::SocketAddr,
        #[arg(long, default_value_t = 2007)]
        t: i32,
        #[arg(long, default_value_t = 5)]
        dt: u32,
        #[arg(long, value_parser = parse_learner, default_value = "lrc")]
        learner: LearnerKind,
        #[arg(long, value_enum, default_value_t = ModeArg::Max)]
        mode: ModeArg,
        /// Directory with the built web UI.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
    /// Write a seeded synthetic corpus in AMiner format.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 500)]
        authors: usize,
        #[arg(long, default_value_t = 3000)]
        papers: usize,
        #[arg(long, default_value_t = 2014)]
        seed: u64,
    },
}

fn parse_learner(s: &str) -> Result<LearnerKind, String> {
    s.parse::<LearnerKind>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Max,
    First,
}

impl From<ModeArg> for PrimaryMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Max => PrimaryMode::MaxH,
            ModeArg::First => PrimaryMode::First,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SetArg {
    New,
    Old,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FutureHArg {
    Observed,
    Predicted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RatioArg {
    Threshold,
    HOverPapers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Label,
    FutureH,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    BeforeT,
    Joint,
}

#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    #[arg(long, default_value_t = 2007)]
    pub t: i32,
    #[arg(long, default_value_t = 5)]
    pub dt: u32,
    #[arg(long, value_enum, default_value_t = ModeArg::Max)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SetArg::New)]
    pub set: SetArg,
    #[arg(long, default_value_t = 10)]
    pub min_h: u32,
    /// Label against observed future h-indices or regressor predictions.
    #[arg(long, value_enum, default_value_t = FutureHArg::Observed)]
    pub future_h: FutureHArg,
    #[arg(long, value_enum, default_value_t = RatioArg::Threshold)]
    pub ratio: RatioArg,
    /// Add missing-data indicator columns.
    #[arg(long)]
    pub flags: bool,
}

impl SpecArgs {
    pub fn spec(&self) -> DatasetSpec {
        DatasetSpec {
            t: self.t,
            delta_t: self.dt,
            mode: self.mode.into(),
            set: match self.set {
                SetArg::New => PaperSet::New,
                SetArg::Old => PaperSet::Old,
            },
            min_h: self.min_h,
            future_h_source: match self.future_h {
                FutureHArg::Observed => FutureHSource::Observed,
                FutureHArg::Predicted => FutureHSource::Predicted,
            },
            ratio_mode: match self.ratio {
                RatioArg::Threshold => RatioMode::Threshold,
                RatioArg::HOverPapers => RatioMode::HOverPapers,
            },
            include_flags: self.flags,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, default_value_t = 2014)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

#[derive(Debug, Clone, Args)]
pub struct TopicsArgs {
    #[arg(long, default_value_t = 2007)]
    pub t: i32,
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    /// Gibbs sweeps.
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    /// Fold-in sweeps for papers outside the training scope.
    #[arg(long, default_value_t = 100)]
    pub infer_iters: usize,
    /// Document-topic prior; defaults to 50 / k.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub beta: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ScopeArg::BeforeT)]
    pub scope: ScopeArg,
}

impl TopicsArgs {
    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            lda: LdaConfig {
                k: self.k,
                alpha: self.alpha,
                beta: self.beta,
                iterations: self.iters,
                infer_iterations: self.infer_iters,
                seed: self.seed,
            },
            scope: match self.scope {
                ScopeArg::BeforeT => TrainingScope::BeforeT,
                ScopeArg::Joint => TrainingScope::Joint,
            },
            ..Default::default()
        }
    }
}
