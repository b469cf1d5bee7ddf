//! Crate-wide error type.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    MalformedLine { line: usize, msg: String },

    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("{kind} `{id}` references missing document `{doc_id}`")]
    DanglingReference {
        kind: &'static str,
        id: String,
        doc_id: String,
    },

    #[error("document `{doc_id}`: {msg}")]
    InvalidRecord { doc_id: String, msg: String },

    #[error("item `{item_id}` timestamped {timestamp} before document `{doc_id}` publish time {publish_time}")]
    ItemBeforePublish {
        item_id: String,
        doc_id: String,
        timestamp: i64,
        publish_time: i64,
    },

    #[error("unknown document `{0}`")]
    UnknownDocument(String),

    #[error("observation time {t} precedes publish time {publish_time} of document `{doc_id}`")]
    TimeBeforePublish {
        doc_id: String,
        t: i64,
        publish_time: i64,
    },

    #[error("inconsistent generator config: {0}")]
    InvalidSynthConfig(String),

    #[error("empty document text")]
    EmptyDocument,

    #[error("training split contains a single class")]
    SingleClassSplit,

    #[error("training split is empty")]
    EmptySplit,

    #[error("non-finite {what} at iteration {iteration}")]
    NonFinite { what: &'static str, iteration: usize },

    #[error("model `{model_id}` is not fitted")]
    NotFitted { model_id: String },

    #[error("all {bins} calibration bins have support below {min_support}")]
    AllBinsUnderSupported { bins: usize, min_support: usize },

    #[error("no calibration curve for model `{model_id}` and factor `{factor_id}`")]
    MissingCurve { model_id: String, factor_id: String },

    #[error("model `{model_id}`: {quantity} = {value} outside [0,1]")]
    OutOfUnitRange {
        model_id: String,
        quantity: &'static str,
        value: f64,
    },

    #[error("aggregate requires at least one base model output")]
    NoOutputs,

    #[error("verdict does not match outputs: recomputed Prob {recomputed} vs stated {stated}")]
    VerdictMismatch { recomputed: f64, stated: f64 },

    #[error("unknown render format `{0}` (expected `json` or `text`)")]
    UnknownFormat(String),

    #[error("replay times must be ascending")]
    UnorderedTimes,

    #[error("community must have at least {min} members, got {got}")]
    CommunityTooSmall { min: usize, got: usize },

    #[error("permutation test requires at least {min} shuffles, got {got}")]
    TooFewShuffles { min: usize, got: usize },

    #[error("contrastive training requires {0} pairs")]
    MissingPairKind(&'static str),

    #[error("feature vectors must be non-empty and equal-length")]
    BadFeatureVectors,

    #[error("intent centroids are not fitted")]
    UnfittedCentroids,

    #[error("too few labeled documents: need at least {need}, got {got}")]
    TooFewLabeledDocs { need: usize, got: usize },

    #[error("prediction references unknown document `{0}`")]
    UnknownPrediction(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("model file `{path}`: {msg}")]
    ModelFormat { path: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
