#![allow(dead_code)]

//! In-process harness comparing the HTTP service against direct engine calls.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use aic_core::document::to_canonical_json;
use aic_core::{
    compute_factor_report, export_graph, fixture, list_steps, render_report, save_session,
    validate_chain, validate_session, Clock, EntityId, Mutation, Session, SessionConfig, Timestamp,
};
use aic_server::{router, ApiError, CorsPolicy, Store, ValidationResponse};
use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

/// Hands out the fixture script's timestamps in order.
pub struct ScriptClock(AtomicUsize);

impl Clock for ScriptClock {
    fn now(&self) -> Timestamp {
        fixture::script_timestamp(self.0.fetch_add(1, Ordering::SeqCst))
    }
}

pub struct Harness {
    pub app: Router,
    pub store: Arc<Store>,
    _dir: tempfile::TempDir,
}

impl Harness {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let store = Arc::new(Store::new(
            dir.path(),
            Arc::new(ScriptClock(AtomicUsize::new(0))),
        ));
        Harness {
            app: router(store.clone(), &CorsPolicy::Disabled),
            store,
            _dir: dir,
        }
    }

    pub async fn send(
        &self,
        method: Method,
        uri: &str,
        body: Option<Value>,
    ) -> (StatusCode, Vec<u8>) {
        send(&self.app, method, uri, body).await
    }

    pub async fn get(&self, uri: &str) -> (StatusCode, Vec<u8>) {
        self.send(Method::GET, uri, None).await
    }

    pub async fn post(&self, uri: &str, body: Value) -> (StatusCode, Vec<u8>) {
        self.send(Method::POST, uri, Some(body)).await
    }

    pub async fn create(&self, name: &str) -> (String, Vec<u8>) {
        let (status, body) = self.post("/sessions", json!({ "name": name })).await;
        assert_eq!(
            status,
            StatusCode::CREATED,
            "{}",
            String::from_utf8_lossy(&body)
        );
        let doc: Value = serde_json::from_slice(&body).unwrap();
        (doc["session"]["id"].as_str().unwrap().to_owned(), body)
    }
}

pub async fn send(
    app: &Router,
    method: Method,
    uri: &str,
    body: Option<Value>,
) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(serde_json::to_vec(&v).unwrap())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    (
        status,
        resp.into_body()
            .collect()
            .await
            .unwrap()
            .to_bytes()
            .to_vec(),
    )
}

/// The endpoint and body an engine mutation maps to.
pub fn request_for(session: &Session, id: &str, m: &Mutation) -> (String, Value) {
    let v = session.version();
    match m {
        Mutation::SubmitAssertion {
            step,
            text,
            referenced_entities,
        } => (
            format!("/sessions/{id}/steps/{step}/assertions"),
            json!({ "expected_version": v, "text": text, "referenced_entities": referenced_entities }),
        ),
        Mutation::CompleteStep { step } => (
            format!("/sessions/{id}/steps/{step}/complete"),
            json!({ "expected_version": v }),
        ),
        Mutation::ReconfirmStep { step } => (
            format!("/sessions/{id}/steps/{step}/reconfirm"),
            json!({ "expected_version": v }),
        ),
        Mutation::ReviseAssertion {
            assertion,
            text,
            rationale,
            ..
        } => (
            format!("/sessions/{id}/assertions/{assertion}/revise"),
            json!({ "expected_version": v, "text": text, "rationale": rationale }),
        ),
        other => (
            format!("/sessions/{id}/mutations"),
            json!({ "expected_version": v, "mutation": other }),
        ),
    }
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

/// Checks every GET endpoint against the engine and that none of them
/// changes the stored document.
pub async fn check_reads(h: &Harness, id: &str, direct: &Session) {
    let before = h.store.read_bytes(id).unwrap();
    let expect_json = |v: Vec<u8>| text(&v);
    let mut cases: Vec<(String, String)> = vec![
        (
            "/steps".into(),
            expect_json(to_canonical_json(&list_steps())),
        ),
        (format!("/sessions/{id}"), text(&save_session(direct))),
        (
            format!("/sessions/{id}/validation"),
            expect_json(to_canonical_json(&ValidationResponse {
                session_id: id.to_owned(),
                version: direct.version(),
                findings: validate_session(direct),
            })),
        ),
        (
            format!("/sessions/{id}/factors"),
            expect_json(to_canonical_json(
                &compute_factor_report(direct, direct.config().red_flag_threshold).unwrap(),
            )),
        ),
        (
            format!("/sessions/{id}/factors?threshold=2"),
            expect_json(to_canonical_json(
                &compute_factor_report(direct, 2).unwrap(),
            )),
        ),
        (format!("/sessions/{id}/report"), render_report(direct)),
        (
            format!("/sessions/{id}/graph"),
            expect_json(to_canonical_json(&export_graph(direct))),
        ),
    ];
    for p in direct.purposes() {
        cases.push((
            format!("/sessions/{id}/validation?purpose={}", p.id),
            expect_json(to_canonical_json(&validate_chain(direct, &p.id).unwrap())),
        ));
    }
    for (uri, want) in cases {
        let (status, body) = h.get(&uri).await;
        assert_eq!(status, StatusCode::OK, "GET {uri}: {}", text(&body));
        assert_eq!(text(&body), want, "GET {uri}");
        assert_eq!(
            h.store.read_bytes(id).unwrap(),
            before,
            "GET {uri} changed the document"
        );
    }
}

/// Replays the fixture walkthrough through the API and the engine side by
/// side, comparing every response and every read endpoint.
pub async fn fixture_conformance() {
    let h = Harness::new();
    let (id, created) = h.create(fixture::SESSION_NAME).await;
    let mut direct =
        Session::with_id(id.clone(), fixture::SESSION_NAME, SessionConfig::default()).unwrap();
    assert_eq!(created, save_session(&direct));
    check_reads(&h, &id, &direct).await;

    for (i, m) in fixture::collision_avoidance_script()
        .into_iter()
        .enumerate()
    {
        let (uri, body) = request_for(&direct, &id, &m);
        direct.apply(m, fixture::script_timestamp(i)).unwrap();
        let (status, resp) = h.post(&uri, body).await;
        assert_eq!(status, StatusCode::OK, "POST {uri}: {}", text(&resp));
        assert_eq!(text(&resp), text(&save_session(&direct)), "POST {uri}");
        if i % 5 == 0 {
            check_reads(&h, &id, &direct).await;
        }
    }
    check_reads(&h, &id, &direct).await;

    // Apart from the id, the result is the bundled fixture.
    let mut expected: Value =
        serde_json::from_slice(&save_session(&fixture::collision_avoidance())).unwrap();
    expected["session"]["id"] = json!(id);
    let got: Value = serde_json::from_slice(&h.store.read_bytes(&id).unwrap()).unwrap();
    assert_eq!(got, expected);
}

/// Rejected requests answer with the engine's error and leave the document alone.
pub async fn error_conformance() {
    let h = Harness::new();
    let (id, _) = h.create("errors").await;
    let direct = Session::with_id(id.clone(), "errors", SessionConfig::default()).unwrap();

    let rejected: Vec<Mutation> = vec![
        Mutation::SubmitAssertion {
            step: 5,
            text: "The architect asserts that it is too early.".into(),
            referenced_entities: Default::default(),
        },
        Mutation::SubmitAssertion {
            step: 1,
            text: "Aircraft may collide.".into(),
            referenced_entities: Default::default(),
        },
        Mutation::CompleteStep { step: 1 },
        Mutation::CompleteStep { step: 9 },
        Mutation::ReconfirmStep { step: 1 },
        Mutation::AddAspect {
            token: "plain".into(),
            description: None,
        },
        Mutation::AddToSphere {
            system: EntityId::new("sys-1"),
            aspect: EntityId::new("asp-2"),
        },
    ];
    for m in rejected {
        let before = h.store.read_bytes(&id).unwrap();
        let want = ApiError::from(
            direct
                .clone()
                .apply(m.clone(), Timestamp::from_unix(0))
                .unwrap_err(),
        );
        let (uri, body) = request_for(&direct, &id, &m);
        let (status, resp) = h.post(&uri, body).await;
        assert_eq!(status.as_u16(), want.status, "POST {uri}: {}", text(&resp));
        let got: ApiError = serde_json::from_slice(&resp).unwrap();
        assert_eq!(got, want, "POST {uri}");
        assert_eq!(
            h.store.read_bytes(&id).unwrap(),
            before,
            "POST {uri} changed the document"
        );
    }

    // Stale expected_version.
    let (status, resp) = h
        .post(
            &format!("/sessions/{id}/steps/1/complete"),
            json!({ "expected_version": 7 }),
        )
        .await;
    assert_eq!(status, StatusCode::CONFLICT);
    let got: ApiError = serde_json::from_slice(&resp).unwrap();
    assert_eq!(
        (got.code.as_str(), got.expected_version, got.current_version),
        ("VERSION_CONFLICT", Some(7), Some(1))
    );

    // Malformed bodies and unknown resources.
    for (uri, body) in [
        (format!("/sessions/{id}/steps/1/complete"), json!({})),
        (
            format!("/sessions/{id}/steps/1/assertions"),
            json!({ "expected_version": 1 }),
        ),
        (
            format!("/sessions/{id}/mutations"),
            json!({ "expected_version": 1, "mutation": { "op": "fly" } }),
        ),
        (
            format!("/sessions/{id}/steps/one/complete"),
            json!({ "expected_version": 1 }),
        ),
    ] {
        let (status, resp) = h.post(&uri, body).await;
        assert_eq!(
            status,
            StatusCode::BAD_REQUEST,
            "POST {uri}: {}",
            text(&resp)
        );
        let got: ApiError = serde_json::from_slice(&resp).unwrap();
        assert_eq!(got.code, "MALFORMED_REQUEST");
    }
    for uri in [
        "/sessions/nope",
        "/sessions/nope/report",
        "/sessions/..%2F..%2Fetc/graph",
    ] {
        let (status, _) = h.get(uri).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "GET {uri}");
    }
    let (status, _) = h
        .post(
            &format!("/sessions/{id}/assertions/asr-99/revise"),
            json!({ "expected_version": 1, "text": "x", "rationale": "y" }),
        )
        .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = h
        .get(&format!("/sessions/{id}/validation?purpose=pur-1"))
        .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = h.get(&format!("/sessions/{id}/factors?threshold=0")).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = h.get(&format!("/sessions/{id}/factors?threshold=x")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    check_reads(&h, &id, &direct).await;
}

/// Two requests built on the same version: exactly one wins, and the stored
/// document is the winner's response.
pub async fn concurrent_conflicts(rounds: usize) {
    let h = Harness::new();
    let (id, _) = h.create("race").await;
    for round in 0..rounds {
        let version = serde_json::from_slice::<Value>(&h.store.read_bytes(&id).unwrap()).unwrap()
            ["session"]["version"]
            .as_u64()
            .unwrap();
        let body = |n: usize| {
            json!({
                "expected_version": version,
                "text": format!("The architect asserts that contender {n} of round {round} wins."),
            })
        };
        let uri = format!("/sessions/{id}/steps/1/assertions");
        let (a, b) = tokio::join!(
            tokio::spawn({
                let app = h.app.clone();
                let (uri, body) = (uri.clone(), body(1));
                async move { send(&app, Method::POST, &uri, Some(body)).await }
            }),
            tokio::spawn({
                let app = h.app.clone();
                let (uri, body) = (uri.clone(), body(2));
                async move { send(&app, Method::POST, &uri, Some(body)).await }
            }),
        );
        let results = [a.unwrap(), b.unwrap()];
        let winners: Vec<&Vec<u8>> = results
            .iter()
            .filter(|(s, _)| *s == StatusCode::OK)
            .map(|(_, b)| b)
            .collect();
        let losers: Vec<&Vec<u8>> = results
            .iter()
            .filter(|(s, _)| *s == StatusCode::CONFLICT)
            .map(|(_, b)| b)
            .collect();
        assert_eq!((winners.len(), losers.len()), (1, 1), "round {round}");
        assert_eq!(&h.store.read_bytes(&id).unwrap(), winners[0]);
        let loser: ApiError = serde_json::from_slice(losers[0]).unwrap();
        assert_eq!(loser.current_version, Some(version + 1));
        let stored: Value = serde_json::from_slice(winners[0]).unwrap();
        assert_eq!(
            stored["session"]["assertions"].as_array().unwrap().len(),
            round + 1
        );
    }
}
