//! Error responses.
//!
//! Every engine error maps to exactly one status through [`STATUS_TABLE`]:
//!
//! | Code | Status |
//! |---|---|
//! | `NOT_FOUND` | 404 |
//! | `VERSION_CONFLICT` | 409 |
//! | `MALFORMED_REQUEST` | 400 |
//! | `DUPLICATE`, `VALIDATION`, `FIXEDNESS`, `SPHERE`, `CHAIN`, `GATING`, `TEMPLATE`, `REFERENCE`, `EMPTY_STEP`, `ALREADY_COMPLETE`, `STALE_REFERENCE`, `STATE` | 422 |
//! | `PARSE`, `UNSUPPORTED_VERSION`, `INVALID_DOCUMENT`, `IO` | 500 |
//!
//! A stored document that fails to load is a server-side fault, hence 500.

use aic_core::Error;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

pub const MALFORMED_REQUEST: &str = "MALFORMED_REQUEST";

pub const STATUS_TABLE: &[(&str, StatusCode)] = &[
    ("NOT_FOUND", StatusCode::NOT_FOUND),
    ("VERSION_CONFLICT", StatusCode::CONFLICT),
    (MALFORMED_REQUEST, StatusCode::BAD_REQUEST),
    ("DUPLICATE", StatusCode::UNPROCESSABLE_ENTITY),
    ("VALIDATION", StatusCode::UNPROCESSABLE_ENTITY),
    ("FIXEDNESS", StatusCode::UNPROCESSABLE_ENTITY),
    ("SPHERE", StatusCode::UNPROCESSABLE_ENTITY),
    ("CHAIN", StatusCode::UNPROCESSABLE_ENTITY),
    ("GATING", StatusCode::UNPROCESSABLE_ENTITY),
    ("TEMPLATE", StatusCode::UNPROCESSABLE_ENTITY),
    ("REFERENCE", StatusCode::UNPROCESSABLE_ENTITY),
    ("EMPTY_STEP", StatusCode::UNPROCESSABLE_ENTITY),
    ("ALREADY_COMPLETE", StatusCode::UNPROCESSABLE_ENTITY),
    ("STALE_REFERENCE", StatusCode::UNPROCESSABLE_ENTITY),
    ("STATE", StatusCode::UNPROCESSABLE_ENTITY),
    ("PARSE", StatusCode::INTERNAL_SERVER_ERROR),
    ("UNSUPPORTED_VERSION", StatusCode::INTERNAL_SERVER_ERROR),
    ("INVALID_DOCUMENT", StatusCode::INTERNAL_SERVER_ERROR),
    ("IO", StatusCode::INTERNAL_SERVER_ERROR),
];

pub fn status_for(code: &str) -> StatusCode {
    STATUS_TABLE
        .iter()
        .find(|(c, _)| *c == code)
        .map_or(StatusCode::INTERNAL_SERVER_ERROR, |(_, s)| *s)
}

/// JSON error body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_version: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_version: Option<u64>,
}

impl ApiError {
    pub fn malformed(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST.as_u16(),
            code: MALFORMED_REQUEST.into(),
            message: message.into(),
            expected_version: None,
            current_version: None,
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (expected_version, current_version) = match e {
            Error::VersionConflict { expected, current } => (Some(expected), Some(current)),
            _ => (None, None),
        };
        ApiError {
            status: status_for(e.code()).as_u16(),
            code: e.code().into(),
            message: e.to_string(),
            expected_version,
            current_version,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}
