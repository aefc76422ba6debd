//! Uniform error envelope and the mapping from store and domain errors.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use runlog_core::domain::DomainError;
use runlog_core::StoreError;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Machine-readable error class carried in every error body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    NotFound,
    Conflict,
    Invalid,
    Unauthorized,
    TooLarge,
    Internal,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 6] = [
        ErrorCode::NotFound,
        ErrorCode::Conflict,
        ErrorCode::Invalid,
        ErrorCode::Unauthorized,
        ErrorCode::TooLarge,
        ErrorCode::Internal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::NotFound => "NOT_FOUND",
            ErrorCode::Conflict => "CONFLICT",
            ErrorCode::Invalid => "INVALID",
            ErrorCode::Unauthorized => "UNAUTHORIZED",
            ErrorCode::TooLarge => "TOO_LARGE",
            ErrorCode::Internal => "INTERNAL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEnvelope {
    pub code: ErrorCode,
    pub message: String,
    /// Structured context, e.g. `{"field": "shift"}`; `null` when there is none.
    pub detail: Value,
}

#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub envelope: ErrorEnvelope,
}

impl ApiError {
    pub fn new(status: StatusCode, code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError { status, envelope: ErrorEnvelope { code, message: message.into(), detail: Value::Null } }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.envelope.detail = detail;
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, ErrorCode::Invalid, message)
    }

    pub fn bad_param(param: &str, message: impl std::fmt::Display) -> Self {
        ApiError::bad_request(format!("query parameter {param:?}: {message}")).with_detail(json!({ "param": param }))
    }

    pub fn unauthorized(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::UNAUTHORIZED, ErrorCode::Unauthorized, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, ErrorCode::NotFound, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, ErrorCode::Internal, message)
    }
}

impl From<DomainError> for ApiError {
    fn from(e: DomainError) -> Self {
        let message = e.to_string();
        match e {
            DomainError::InvalidTransition(_) => ApiError::new(StatusCode::CONFLICT, ErrorCode::Conflict, message),
            DomainError::NotFound(_) => ApiError::not_found(message),
            DomainError::MissingField(field) => {
                ApiError::bad_request(message).with_detail(json!({ "field": field }))
            }
            DomainError::InvalidQuery(_) | DomainError::InvalidTag(_) => ApiError::bad_request(message),
            DomainError::InvalidTimestamps(_) | DomainError::Invalid(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, ErrorCode::Invalid, message)
            }
            DomainError::InvalidInputKind(kind) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, ErrorCode::Invalid, message)
                    .with_detail(json!({ "kind": kind }))
            }
            DomainError::BrokenLineage { .. } | DomainError::CorruptLineage { .. } => ApiError::internal(message),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let message = e.to_string();
        match e {
            StoreError::Domain(d) => d.into(),
            StoreError::NotFound(_) => ApiError::not_found(message),
            StoreError::Conflict(_) => ApiError::new(StatusCode::CONFLICT, ErrorCode::Conflict, message),
            StoreError::UnknownReference(r) => {
                ApiError::not_found(message).with_detail(json!({ "reference": r.to_string() }))
            }
            StoreError::UnknownDigest(d) => ApiError::not_found(message).with_detail(json!({ "digest": d })),
            StoreError::TooLarge { size, max } => {
                ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, ErrorCode::TooLarge, message)
                    .with_detail(json!({ "size": size, "max": max }))
            }
            StoreError::Parse { line, .. } => ApiError::bad_request(message).with_detail(json!({ "line": line })),
            StoreError::Corrupt(_) | StoreError::ReadOnly | StoreError::Crashed | StoreError::Io(_) => {
                ApiError::internal(message)
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.envelope)).into_response()
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
