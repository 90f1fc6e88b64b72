use thiserror::Error;

use crate::model::Stage;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{kind} `{id}` not found")]
    NotFound { kind: &'static str, id: String },

    #[error("dangling reference: {0}")]
    ReferentialIntegrity(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("`{id}` already exists")]
    Conflict { id: String },

    #[error("operation requires stage {expected}, session is in {actual:?}")]
    WrongStage { expected: String, actual: Stage },

    #[error("illegal stage transition {from:?} -> {to:?}")]
    IllegalTransition { from: Stage, to: Stage },

    #[error("precondition failed: {report}")]
    PreconditionFailed { report: String, details: Vec<String> },

    #[error("actor `{0}` is not a facilitator of this session")]
    NotFacilitator(String),

    #[error("missing or invalid facilitator token")]
    Unauthorized,

    #[error("discussion is already at its final segment")]
    AtFinalSegment,

    #[error("ranking for segment {submitted} rejected; session is in segment {current:?}")]
    WrongSegment { submitted: u8, current: Option<u8> },

    #[error("attribute `{0}` listed more than once")]
    DuplicateAttribute(String),

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("ballot must list 1..=5 attributes, got {0}")]
    BallotLength(usize),

    #[error("no ballots submitted for segment {0}")]
    NoBallots(u8),

    #[error("rankings share {0} attributes; at least 2 are required")]
    InsufficientOverlap(usize),

    #[error("no segment-5 rankings have been submitted")]
    NoSegmentFiveData,

    #[error("group-final attributes without a definition: {}", .0.join(", "))]
    MissingDefinitions(Vec<String>),

    #[error("no annotations match the requested filter")]
    NoAnnotations,

    #[error("participant `{0}` is not part of this session")]
    UnknownParticipant(String),

    #[error("interaction `{0}` is not in the participant's workload")]
    NotInWorkload(String),

    #[error("span out of bounds: {0}")]
    SpanOutOfBounds(String),

    #[error("annotation target must be a model turn")]
    NotModelTurn,

    #[error("annotation `{0}` belongs to another participant")]
    CrossParticipantGrouping(String),

    #[error("annotation `{0}` is already grouped")]
    DoubleGrouping(String),

    #[error("label is empty after normalization")]
    EmptyLabel,

    #[error("label `{0}` is not on the board")]
    UnknownLabel(String),

    #[error("k = {k} must satisfy 1 <= k < {available}")]
    BadK { k: usize, available: usize },

    #[error("interaction `{0}` has an exchange in flight")]
    Busy(String),

    #[error("interaction `{0}` is waiting for a model reply; retry it first")]
    PendingReply(String),

    #[error("interaction `{0}` has no pending reply")]
    NoPendingReply(String),

    #[error("model provider unavailable: {0}")]
    ProviderUnavailable(String),

    #[error("model provider timed out")]
    ProviderTimeout,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported export format `{0}`")]
    UnsupportedFormat(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Stable machine-readable code, surfaced to HTTP clients.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Validation(_) => "ValidationError",
            Error::NotFound { .. } => "NotFound",
            Error::ReferentialIntegrity(_) => "ReferentialIntegrityError",
            Error::InvariantViolation(_) => "InvariantViolation",
            Error::Conflict { .. } => "Conflict",
            Error::WrongStage { .. } => "WrongStage",
            Error::IllegalTransition { .. } => "IllegalTransition",
            Error::PreconditionFailed { .. } => "PreconditionFailed",
            Error::NotFacilitator(_) => "NotFacilitator",
            Error::Unauthorized => "Unauthorized",
            Error::AtFinalSegment => "AtFinalSegment",
            Error::WrongSegment { .. } => "WrongSegment",
            Error::DuplicateAttribute(_) => "DuplicateAttribute",
            Error::UnknownAttribute(_) => "UnknownAttribute",
            Error::BallotLength(_) => "BallotLength",
            Error::NoBallots(_) => "NoBallots",
            Error::InsufficientOverlap(_) => "InsufficientOverlap",
            Error::NoSegmentFiveData => "NoSegmentFiveData",
            Error::MissingDefinitions(_) => "MissingDefinitions",
            Error::NoAnnotations => "NoAnnotations",
            Error::UnknownParticipant(_) => "UnknownParticipant",
            Error::NotInWorkload(_) => "NotInWorkload",
            Error::SpanOutOfBounds(_) => "SpanOutOfBounds",
            Error::NotModelTurn => "NotModelTurn",
            Error::CrossParticipantGrouping(_) => "CrossParticipantGrouping",
            Error::DoubleGrouping(_) => "DoubleGrouping",
            Error::EmptyLabel => "EmptyLabel",
            Error::UnknownLabel(_) => "UnknownLabel",
            Error::BadK { .. } => "BadK",
            Error::Busy(_) => "Busy",
            Error::PendingReply(_) => "PendingReply",
            Error::NoPendingReply(_) => "NoPendingReply",
            Error::ProviderUnavailable(_) => "ProviderUnavailable",
            Error::ProviderTimeout => "ProviderTimeout",
            Error::Parse { .. } => "ParseError",
            Error::UnsupportedFormat(_) => "UnsupportedFormat",
            Error::Io(_) => "IoError",
            Error::Json(_) => "JsonError",
            Error::Csv(_) => "CsvError",
            Error::Config(_) => "ConfigError",
        }
    }

    /// Structured detail for error bodies; `null` when the message says it all.
    pub fn detail(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            Error::PreconditionFailed { details, .. } => json!({ "unmet": details }),
            Error::MissingDefinitions(names) => json!({ "attributes": names }),
            Error::Parse { line, column, .. } => json!({ "line": line, "column": column }),
            Error::WrongStage { expected, actual } => {
                json!({ "expected": expected, "actual": actual })
            }
            Error::IllegalTransition { from, to } => json!({ "from": from, "to": to }),
            Error::BadK { k, available } => json!({ "k": k, "available": available }),
            _ => serde_json::Value::Null,
        }
    }

    pub(crate) fn not_found(kind: &'static str, id: impl Into<String>) -> Self {
        Error::NotFound {
            kind,
            id: id.into(),
        }
    }
}
