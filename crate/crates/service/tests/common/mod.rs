#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use polidoxa_core::{timestamp, CoefficientSet};
use polidoxa_service::{BootstrapAdmin, Caller, CoefficientPatch, ManualClock, Service, ServiceConfig, TrustValue};
use tower::ServiceExt;

pub const AS_OF: &str = "2012-06-01T00:00:00Z";

pub fn fixture(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/inversion").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn clock() -> Arc<ManualClock> {
    Arc::new(ManualClock::new(timestamp::parse(AS_OF).unwrap()))
}

pub fn config(dir: Option<&Path>) -> ServiceConfig {
    ServiceConfig {
        data_dir: dir.map(Path::to_path_buf),
        bootstrap_admin: Some(BootstrapAdmin {
            handle: "root".into(),
            credential: "secret".into(),
        }),
        ..ServiceConfig::default()
    }
}

pub fn open(dir: Option<&Path>, clock: Arc<ManualClock>) -> Arc<Service> {
    Arc::new(Service::open(config(dir), clock).unwrap())
}

pub fn admin(svc: &Service) -> Caller {
    svc.local_caller("root").unwrap()
}

/// Graph, posts, events and coefficients of the ranking fixture, with the
/// searcher `me` trusting ouest-france at 55.
pub fn load_inversion(svc: &Service) {
    let root = admin(svc);
    svc.ingest_graph(&root, &fixture("graph.txt")).unwrap();
    let posts = svc.ingest_posts(&root, &fixture("posts.jsonl")).unwrap();
    assert!(posts.rejected.is_empty(), "{posts:?}");
    let events = svc.ingest_events(&root, &fixture("events.jsonl")).unwrap();
    assert!(events.rejected.is_empty(), "{events:?}");
    let set = CoefficientSet::from_config(&fixture("coefficients.conf")).unwrap();
    let patch: CoefficientPatch = set
        .entries()
        .iter()
        .map(|(name, c)| (name.to_string(), serde_json::Value::String(c.to_string())))
        .collect();
    svc.put_coefficients(&root, patch).unwrap();
    let me = svc.local_caller("me").unwrap();
    svc.put_trust(&me, "ouest-france", TrustValue { value: "55".parse().unwrap() })
        .unwrap();
}

pub async fn call(app: &Router, method: &str, uri: &str, token: Option<&str>, body: &str) -> (StatusCode, String) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header("authorization", format!("Bearer {t}"));
    }
    let resp = app
        .clone()
        .oneshot(req.body(Body::from(body.to_string())).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

pub fn json(body: &str) -> serde_json::Value {
    serde_json::from_str(body).unwrap_or_else(|e| panic!("{e}: {body}"))
}

pub async fn login(app: &Router, handle: &str, credential: &str) -> String {
    let (status, body) = call(
        app,
        "POST",
        "/login",
        None,
        &format!(r#"{{"handle":"{handle}","credential":"{credential}"}}"#),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    json(&body)["token"].as_str().unwrap().to_string()
}

/// Registers and validates `handle`, returning the validation response.
pub async fn enroll(app: &Router, handle: &str, email: &str) -> serde_json::Value {
    let (status, body) = call(
        app,
        "POST",
        "/register",
        None,
        &format!(r#"{{"handle":"{handle}","credential":"pw-{handle}","email":"{email}"}}"#),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let token = json(&body)["validation_token"].as_str().unwrap().to_string();
    let (status, body) = call(app, "POST", "/validate", None, &format!(r#"{{"token":"{token}"}}"#)).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    json(&body)
}
