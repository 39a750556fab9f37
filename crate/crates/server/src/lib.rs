//! HTTP service over AIC articulation sessions.
//!
//! Sessions live in a storage directory as the same `.aic.json` documents the
//! CLI edits. Every mutating request names the `expected_version` it was based
//! on and answers with the full updated document; a stale version is refused
//! with 409. JSON bodies are serialized canonically, so equal states produce
//! equal bytes.

pub mod error;
pub mod store;

use std::collections::{BTreeSet, HashMap};
use std::io;
use std::sync::Arc;

use aic_core::document::to_canonical_json;
use aic_core::{
    compute_factor_report, export_graph, list_steps, render_report, validate_chain,
    validate_session, EntityId, Error, Finding, Mutation, SessionConfig,
};
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

pub use error::ApiError;
pub use store::Store;

type ApiResult<T = Response> = std::result::Result<T, ApiError>;

/// Which browser origins may call the service.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum CorsPolicy {
    /// No CORS headers; same-origin clients only.
    #[default]
    Disabled,
    Any,
    Origins(Vec<String>),
}

impl CorsPolicy {
    /// `""` disables CORS, `"*"` allows any origin, otherwise a comma-separated origin list.
    pub fn parse(origins: &str) -> Self {
        match origins.trim() {
            "" => CorsPolicy::Disabled,
            "*" => CorsPolicy::Any,
            list => CorsPolicy::Origins(
                list.split(',')
                    .map(|o| o.trim().to_owned())
                    .filter(|o| !o.is_empty())
                    .collect(),
            ),
        }
    }

    fn layer(&self) -> Option<CorsLayer> {
        let origins = match self {
            CorsPolicy::Disabled => return None,
            CorsPolicy::Any => AllowOrigin::from(Any),
            CorsPolicy::Origins(list) => {
                AllowOrigin::list(list.iter().filter_map(|o| HeaderValue::from_str(o).ok()))
            }
        };
        Some(
            CorsLayer::new()
                .allow_origin(origins)
                .allow_methods(Any)
                .allow_headers(Any),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSessionRequest {
    pub name: String,
    #[serde(default)]
    pub red_flag_threshold: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmitRequest {
    pub expected_version: u64,
    pub text: String,
    #[serde(default)]
    pub referenced_entities: BTreeSet<EntityId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VersionRequest {
    pub expected_version: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReviseRequest {
    pub expected_version: u64,
    pub text: String,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutationRequest {
    pub expected_version: u64,
    pub mutation: Mutation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationResponse {
    pub session_id: String,
    pub version: u64,
    pub findings: Vec<Finding>,
}

pub fn router(store: Arc<Store>, cors: &CorsPolicy) -> Router {
    let app = Router::new()
        .route("/steps", get(steps))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/steps/{k}/assertions", post(submit))
        .route("/sessions/{id}/steps/{k}/complete", post(complete))
        .route("/sessions/{id}/steps/{k}/reconfirm", post(reconfirm))
        .route("/sessions/{id}/assertions/{aid}/revise", post(revise))
        .route("/sessions/{id}/mutations", post(mutate))
        .route("/sessions/{id}/validation", get(validation))
        .route("/sessions/{id}/factors", get(factors))
        .route("/sessions/{id}/report", get(report))
        .route("/sessions/{id}/graph", get(graph))
        .with_state(store);
    match cors.layer() {
        Some(layer) => app.layer(layer),
        None => app,
    }
}

pub async fn serve(listener: TcpListener, app: Router) -> io::Result<()> {
    axum::serve(listener, app).await
}

fn json<T: Serialize>(status: StatusCode, value: &T) -> Response {
    document(status, to_canonical_json(value))
}

fn document(status: StatusCode, bytes: Vec<u8>) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::malformed(format!("invalid request body: {e}")))
}

fn parse_step(raw: &str) -> ApiResult<u8> {
    match raw.parse::<u8>() {
        Ok(k) => Ok(k),
        Err(_) if !raw.is_empty() && raw.bytes().all(|b| b.is_ascii_digit()) => {
            Err(Error::NotFound {
                what: "step",
                id: raw.to_owned(),
            }
            .into())
        }
        Err(_) => Err(ApiError::malformed(format!(
            "step index `{raw}` is not a number"
        ))),
    }
}

async fn steps() -> Response {
    json(StatusCode::OK, &list_steps())
}

async fn create_session(State(store): State<Arc<Store>>, body: Bytes) -> ApiResult {
    let req: CreateSessionRequest = parse_body(&body)?;
    let mut config = SessionConfig::default();
    if let Some(t) = req.red_flag_threshold {
        config.red_flag_threshold = t;
    }
    let (_, bytes) = store.create(&req.name, config)?;
    Ok(document(StatusCode::CREATED, bytes))
}

async fn get_session(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult {
    Ok(document(StatusCode::OK, store.read_bytes(&id)?))
}

async fn apply(store: &Store, id: &str, expected_version: u64, mutation: Mutation) -> ApiResult {
    let bytes = store.mutate(id, expected_version, mutation).await?;
    Ok(document(StatusCode::OK, bytes))
}

async fn submit(
    State(store): State<Arc<Store>>,
    Path((id, k)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult {
    let step = parse_step(&k)?;
    let req: SubmitRequest = parse_body(&body)?;
    let m = Mutation::SubmitAssertion {
        step,
        text: req.text,
        referenced_entities: req.referenced_entities,
    };
    apply(&store, &id, req.expected_version, m).await
}

async fn complete(
    State(store): State<Arc<Store>>,
    Path((id, k)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult {
    let step = parse_step(&k)?;
    let req: VersionRequest = parse_body(&body)?;
    apply(
        &store,
        &id,
        req.expected_version,
        Mutation::CompleteStep { step },
    )
    .await
}

async fn reconfirm(
    State(store): State<Arc<Store>>,
    Path((id, k)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult {
    let step = parse_step(&k)?;
    let req: VersionRequest = parse_body(&body)?;
    apply(
        &store,
        &id,
        req.expected_version,
        Mutation::ReconfirmStep { step },
    )
    .await
}

async fn revise(
    State(store): State<Arc<Store>>,
    Path((id, aid)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult {
    let req: ReviseRequest = parse_body(&body)?;
    let assertion = EntityId::new(aid);
    // An assertion never moves between steps, so reading outside the lock is safe.
    let step = store
        .load(&id)?
        .assertion(&assertion)
        .map(|a| a.step_index)
        .ok_or_else(|| Error::NotFound {
            what: "assertion",
            id: assertion.to_string(),
        })?;
    let m = Mutation::ReviseAssertion {
        step,
        assertion,
        text: req.text,
        rationale: req.rationale,
    };
    apply(&store, &id, req.expected_version, m).await
}

async fn mutate(State(store): State<Arc<Store>>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let req: MutationRequest = parse_body(&body)?;
    apply(&store, &id, req.expected_version, req.mutation).await
}

async fn validation(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    Query(query): Query<HashMap<String, String>>,
) -> ApiResult {
    let session = store.load(&id)?;
    if let Some(purpose) = query.get("purpose") {
        let trace = validate_chain(&session, &EntityId::new(purpose.as_str()))?;
        return Ok(json(StatusCode::OK, &trace));
    }
    let body = ValidationResponse {
        session_id: session.id().to_owned(),
        version: session.version(),
        findings: validate_session(&session),
    };
    Ok(json(StatusCode::OK, &body))
}

async fn factors(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    Query(query): Query<HashMap<String, String>>,
) -> ApiResult {
    let session = store.load(&id)?;
    let threshold = match query.get("threshold") {
        None => session.config().red_flag_threshold,
        Some(raw) => raw.parse().map_err(|_| {
            ApiError::malformed(format!("threshold `{raw}` is not a non-negative integer"))
        })?,
    };
    Ok(json(
        StatusCode::OK,
        &compute_factor_report(&session, threshold)?,
    ))
}

async fn report(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult {
    let session = store.load(&id)?;
    Ok((
        [(header::CONTENT_TYPE, "text/markdown; charset=utf-8")],
        render_report(&session),
    )
        .into_response())
}

async fn graph(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult {
    let session = store.load(&id)?;
    Ok(json(StatusCode::OK, &export_graph(&session)))
}
