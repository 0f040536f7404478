//! Axum routes. Each handler resolves the caller, parses the body and hands
//! off to the matching [`Service`] method; the response body is that
//! method's result serialized with `serde_json::to_string`.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::api::*;
use crate::error::ApiError;
use crate::service::{Caller, Service};

type Shared = State<Arc<Service>>;

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.kind.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, [(header::CONTENT_TYPE, "application/json")], self.to_json()).into_response()
    }
}

/// JSON response for a service result.
pub fn respond<T: Serialize>(result: Result<T, ApiError>) -> Response {
    match result {
        Ok(v) => (
            StatusCode::OK,
            [(header::CONTENT_TYPE, "application/json")],
            serde_json::to_string(&v).expect("responses serialize"),
        )
            .into_response(),
        Err(e) => e.into_response(),
    }
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    headers
        .get(header::AUTHORIZATION)?
        .to_str()
        .ok()?
        .strip_prefix("Bearer ")
        .map(str::trim)
}

fn caller(svc: &Service, headers: &HeaderMap) -> Result<Caller, ApiError> {
    svc.authenticate(bearer(headers))
}

fn json<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed body: {e}")))
}

fn text(body: &Bytes) -> Result<&str, ApiError> {
    std::str::from_utf8(body).map_err(|_| ApiError::bad_request("body is not UTF-8"))
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(v)| v)
        .map_err(|e| ApiError::bad_request(format!("malformed query: {}", e.body_text())))
}

pub fn router(svc: Arc<Service>) -> Router {
    Router::new()
        .route("/register", post(register))
        .route("/validate", post(validate))
        .route("/login", post(login))
        .route("/follow/{contact}", post(follow))
        .route("/trust/{contact}", put(put_trust).get(get_trust))
        .route("/topic-trust/{contact}/{topic}", put(put_topic_trust).get(get_topic_trust))
        .route("/experts", get(experts))
        .route("/ingest/posts", post(ingest_posts))
        .route("/ingest/events", post(ingest_events))
        .route("/ingest/graph", post(ingest_graph))
        .route("/search", get(search))
        .route("/admin/coefficients", get(get_coefficients).put(put_coefficients))
        .route("/quarantine", get(quarantine_list))
        .route("/quarantine/found", post(quarantine_found))
        .route("/quarantine/submit", post(quarantine_submit))
        .route("/quarantine/{candidate}/approve", post(quarantine_approve))
        .route("/quarantine/{candidate}/flag", post(quarantine_flag))
        .route("/forecast/{stream}", get(forecast))
        .fallback(|| async { ApiError::not_found("no such route") })
        .with_state(svc)
}

async fn register(State(svc): Shared, body: Bytes) -> Response {
    respond(json(&body).and_then(|r| svc.register(r)))
}

async fn validate(State(svc): Shared, body: Bytes) -> Response {
    respond(json(&body).and_then(|r| svc.validate(r)))
}

async fn login(State(svc): Shared, body: Bytes) -> Response {
    respond(json(&body).and_then(|r| svc.login(r)))
}

async fn follow(State(svc): Shared, headers: HeaderMap, Path(contact): Path<String>) -> Response {
    respond(caller(&svc, &headers).and_then(|c| svc.follow(&c, &contact)))
}

async fn put_trust(State(svc): Shared, headers: HeaderMap, Path(contact): Path<String>, body: Bytes) -> Response {
    respond(caller(&svc, &headers).and_then(|c| svc.put_trust(&c, &contact, json(&body)?)))
}

async fn get_trust(
    State(svc): Shared,
    headers: HeaderMap,
    Path(contact): Path<String>,
    q: Result<Query<TrustQuery>, QueryRejection>,
) -> Response {
    respond(caller(&svc, &headers).and_then(|c| svc.get_trust(&c, &contact, query(q)?)))
}

async fn put_topic_trust(
    State(svc): Shared,
    headers: HeaderMap,
    Path((contact, topic)): Path<(String, String)>,
    body: Bytes,
) -> Response {
    respond(caller(&svc, &headers).and_then(|c| svc.put_topic_trust(&c, &contact, &topic, json(&body)?)))
}

async fn get_topic_trust(
    State(svc): Shared,
    headers: HeaderMap,
    Path((contact, topic)): Path<(String, String)>,
) -> Response {
    respond(caller(&svc, &headers).and_then(|c| svc.get_topic_trust(&c, &contact, &topic)))
}

async fn experts(State(svc): Shared, headers: HeaderMap, q: Result<Query<ExpertsQuery>, QueryRejection>) -> Response {
    respond(caller(&svc, &headers).and_then(|c| svc.experts(&c, query(q)?)))
}

async fn ingest_posts(State(svc): Shared, headers: HeaderMap, body: Bytes) -> Response {
    respond(caller(&svc, &headers).and_then(|c| svc.ingest_posts(&c, text(&body)?)))
}

async fn ingest_events(State(svc): Shared, headers: HeaderMap, body: Bytes) -> Response {
    respond(caller(&svc, &headers).and_then(|c| svc.ingest_events(&c, text(&body)?)))
}

async fn ingest_graph(State(svc): Shared, headers: HeaderMap, body: Bytes) -> Response {
    respond(caller(&svc, &headers).and_then(|c| svc.ingest_graph(&c, text(&body)?)))
}

async fn search(State(svc): Shared, headers: HeaderMap, q: Result<Query<SearchQuery>, QueryRejection>) -> Response {
    respond(caller(&svc, &headers).and_then(|c| svc.search(&c, query(q)?)))
}

async fn get_coefficients(State(svc): Shared, headers: HeaderMap) -> Response {
    respond(caller(&svc, &headers).and_then(|c| svc.get_coefficients(&c)))
}

async fn put_coefficients(State(svc): Shared, headers: HeaderMap, body: Bytes) -> Response {
    respond(caller(&svc, &headers).and_then(|c| svc.put_coefficients(&c, json(&body)?)))
}

async fn quarantine_list(State(svc): Shared, headers: HeaderMap) -> Response {
    respond(caller(&svc, &headers).and_then(|c| svc.quarantine_list(&c)))
}

async fn quarantine_found(State(svc): Shared, headers: HeaderMap, body: Bytes) -> Response {
    respond(caller(&svc, &headers).and_then(|c| svc.quarantine_found(&c, json(&body)?)))
}

async fn quarantine_submit(State(svc): Shared, headers: HeaderMap, body: Bytes) -> Response {
    respond(caller(&svc, &headers).and_then(|c| svc.quarantine_submit(&c, json(&body)?)))
}

async fn quarantine_approve(State(svc): Shared, headers: HeaderMap, Path(candidate): Path<String>) -> Response {
    respond(caller(&svc, &headers).and_then(|c| svc.quarantine_approve(&c, &candidate)))
}

async fn quarantine_flag(State(svc): Shared, headers: HeaderMap, Path(candidate): Path<String>) -> Response {
    respond(caller(&svc, &headers).and_then(|c| svc.quarantine_flag(&c, &candidate)))
}

async fn forecast(State(svc): Shared, headers: HeaderMap, Path(stream): Path<String>) -> Response {
    respond(caller(&svc, &headers).and_then(|c| svc.forecast(&c, &stream)))
}

/// Serves on `listener` until ctrl-c.
pub async fn serve(svc: Arc<Service>, listener: tokio::net::TcpListener) -> std::io::Result<()> {
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(svc))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
