use thiserror::Error;

use hforecast::corpus::CorpusError;
use hforecast::evalkit::EvalError;
use hforecast::factorlab::FactorError;
use hforecast::learners::LearnerError;
use hforecast::pipeline::PipelineError;
use hforecast::topicmodel::TopicError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    MissingArtifact(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Topic(#[from] TopicError),
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Stable machine-readable code for the error tail.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::MissingArtifact(_) => "missing-artifact",
            CliError::Config(_) => "config",
            CliError::Corpus(_) => "corpus",
            CliError::Topic(_) => "topics",
            CliError::Factor(_) => "factors",
            CliError::Learner(_) => "learner",
            CliError::Eval(_) => "evaluation",
            CliError::Pipeline(_) => "pipeline",
            CliError::Io(_) => "io",
        }
    }

    /// Single-line tail: `error[<code>]: <message>` with newlines folded.
    pub fn tail(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error[{}]: {msg}", self.code())
    }
}
