//! A SPARQL 1.1 Protocol endpoint backed by an in-memory store. It accepts
//! the query and update text this crate emits, not arbitrary SPARQL.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::extract::{Form, State};
use axum::http::header::CONTENT_TYPE;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::Router;
use sparql_rest::engine::{parse_query, parse_update, TripleStore};
use sparql_rest::results::to_sparql_json;
use tokio::net::TcpListener;
use tokio::task::JoinHandle;

use crate::endpoint::RESULTS_MEDIA_TYPE;

type Store = Arc<RwLock<TripleStore>>;

pub fn router(store: Store) -> Router {
    Router::new().route("/sparql", post(protocol)).with_state(store)
}

fn bad_request(message: String) -> Response {
    (StatusCode::BAD_REQUEST, message).into_response()
}

async fn protocol(State(store): State<Store>, Form(form): Form<HashMap<String, String>>) -> Response {
    match (form.get("query"), form.get("update")) {
        (Some(text), None) => match parse_query(text) {
            Ok(plan) => {
                let table = store.read().expect("store lock poisoned").eval(&plan);
                let body = serde_json::to_string(&to_sparql_json(&table)).expect("JSON values serialize");
                ([(CONTENT_TYPE, RESULTS_MEDIA_TYPE)], body).into_response()
            }
            Err(e) => bad_request(e.to_string()),
        },
        (None, Some(text)) => match parse_update(text) {
            Ok(plan) => {
                store.write().expect("store lock poisoned").apply(&plan);
                StatusCode::NO_CONTENT.into_response()
            }
            Err(e) => bad_request(e.to_string()),
        },
        _ => bad_request("expected exactly one of `query` or `update`".into()),
    }
}

/// Serves [`router`] on an ephemeral local port. Returns the endpoint URL.
pub async fn serve_local(store: Store) -> std::io::Result<(String, JoinHandle<()>)> {
    let listener = TcpListener::bind(SocketAddr::from(([127, 0, 0, 1], 0))).await?;
    let addr = listener.local_addr()?;
    let handle = tokio::spawn(async move {
        let _ = axum::serve(listener, router(store)).await;
    });
    Ok((format!("http://{addr}/sparql"), handle))
}
