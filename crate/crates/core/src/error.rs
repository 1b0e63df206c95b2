use std::path::PathBuf;

use crate::topics::KCandidate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed json in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("duplicate product_id `{0}`")]
    DuplicateProduct(String),

    #[error("invalid asset {name}, line {line}: {message}")]
    Asset {
        name: String,
        line: usize,
        message: String,
    },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("no scorable tokens")]
    NoScorableTokens,

    #[error("need both classes")]
    NeedBothClasses,

    #[error("empty reference")]
    EmptyReference,

    #[error("nothing to evaluate")]
    NothingToEvaluate,

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("K sweep aborted at K={k} after {} finished candidates: {source}", partial.len())]
    SweepAborted {
        k: usize,
        partial: Vec<KCandidate>,
        #[source]
        source: Box<Error>,
    },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn in_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// Stable machine-readable identifier for logs and scripts.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Json { .. } => "malformed_json",
            Error::DuplicateProduct(_) => "duplicate_product",
            Error::Asset { .. } => "invalid_asset",
            Error::EmptyCorpus => "empty_corpus",
            Error::NoScorableTokens => "no_scorable_tokens",
            Error::NeedBothClasses => "need_both_classes",
            Error::EmptyReference => "empty_reference",
            Error::NothingToEvaluate => "nothing_to_evaluate",
            Error::ContractViolation(_) => "contract_violation",
            Error::InvalidModel(_) => "invalid_model",
            Error::Config(_) => "config",
            Error::SweepAborted { .. } => "sweep_aborted",
            Error::Stage { source, .. } => source.code(),
        }
    }

    /// Process exit status: 1 usage, 2 data, 3 internal stage failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Io { .. }
            | Error::Json { .. }
            | Error::DuplicateProduct(_)
            | Error::Asset { .. }
            | Error::EmptyCorpus
            | Error::NeedBothClasses
            | Error::EmptyReference
            | Error::NothingToEvaluate => 2,
            Error::Stage { source, .. } => match source.exit_code() {
                1 => 1,
                2 => 2,
                _ => 3,
            },
            _ => 3,
        }
    }
}
