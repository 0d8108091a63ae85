//! HTTP front end. Every route goes through one handler so that unknown
//! routes and methods get the JSON error format too.

use std::sync::Arc;
use std::time::Instant;

use axum::body::{Body, Bytes};
use axum::extract::State;
use axum::http::header::{CONTENT_TYPE, LOCATION};
use axum::http::{Method, StatusCode, Uri};
use axum::response::Response;
use axum::Router;
use serde_json::Value;

use crate::api::{ApiResponse, Gateway, BATCH_PATH};
use crate::error::{ApiError, ErrorCode};

pub fn router(gateway: Arc<Gateway>) -> Router {
    Router::new().fallback(handle).with_state(gateway)
}

fn json_response(status: u16, body: Option<&Value>, location: Option<&str>) -> Response {
    let mut builder = Response::builder().status(StatusCode::from_u16(status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR));
    if let Some(location) = location {
        builder = builder.header(LOCATION, location);
    }
    let body = match body {
        Some(value) => {
            builder = builder.header(CONTENT_TYPE, "application/json");
            Body::from(serde_json::to_vec(value).expect("JSON values serialize"))
        }
        None => Body::empty(),
    };
    builder.body(body).expect("valid response parts")
}

async fn handle(State(gateway): State<Arc<Gateway>>, method: Method, uri: Uri, body: Bytes) -> Response {
    let started = Instant::now();
    let target = uri.path_and_query().map(|pq| pq.as_str()).unwrap_or_else(|| uri.path()).to_string();
    let response = match std::str::from_utf8(&body) {
        Err(_) => {
            let e = ApiError::new(ErrorCode::MalformedBody, "body is not UTF-8");
            ApiResponse { status: e.status(), body: Some(e.to_json()), location: None, trace: Default::default() }
        }
        Ok(text) if uri.path().trim_end_matches('/') == BATCH_PATH => {
            if method != Method::POST {
                let e = ApiError::method_not_allowed(method.as_str(), BATCH_PATH);
                ApiResponse { status: e.status(), body: Some(e.to_json()), location: None, trace: Default::default() }
            } else {
                let (status, doc) = gateway.handle_batch(text).await;
                ApiResponse { status, body: Some(doc), location: None, trace: Default::default() }
            }
        }
        Ok(text) => gateway.handle_text(method.as_str(), &target, text).await,
    };
    for text in &response.trace.sparql {
        tracing::debug!(sparql = %text, "generated SPARQL");
    }
    tracing::info!(
        method = %method,
        path = %target,
        status = response.status,
        upstream_ms = response.trace.upstream.as_secs_f64() * 1000.0,
        total_ms = started.elapsed().as_secs_f64() * 1000.0,
        "request"
    );
    json_response(response.status, response.body.as_ref(), response.location.as_deref())
}
