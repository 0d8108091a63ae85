//! Query and update execution. [`RemoteHttp`] speaks the SPARQL 1.1
//! Protocol; [`Embedded`] evaluates plans against an in-process store.

use std::sync::{Arc, RwLock};
use std::time::Duration;

use async_trait::async_trait;
use reqwest::header::{ACCEPT, AUTHORIZATION};
use sparql_rest::engine::TripleStore;
use sparql_rest::query::QueryPlan;
use sparql_rest::results::{parse_sparql_json, SolutionTable};
use sparql_rest::update::UpdatePlan;
use thiserror::Error;

pub const RESULTS_MEDIA_TYPE: &str = "application/sparql-results+json";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EndpointError {
    #[error("endpoint unreachable: {0}")]
    Unreachable(String),
    #[error("endpoint answered with HTTP {status}")]
    Upstream { status: u16, body: String },
    #[error("malformed results document: {0}")]
    MalformedResults(String),
}

/// Both operations receive the plan and its serialized text; an
/// implementation uses whichever it can execute.
#[async_trait]
pub trait Endpoint: Send + Sync {
    async fn query(&self, plan: &QueryPlan, text: &str) -> Result<SolutionTable, EndpointError>;
    async fn update(&self, plan: &UpdatePlan, text: &str) -> Result<(), EndpointError>;
}

/// Single writer, many readers. An update holds the write lock for its whole
/// delete-then-insert sequence.
#[derive(Debug, Clone, Default)]
pub struct Embedded {
    store: Arc<RwLock<TripleStore>>,
}

impl Embedded {
    pub fn new(store: TripleStore) -> Embedded {
        Embedded { store: Arc::new(RwLock::new(store)) }
    }

    pub fn shared(store: Arc<RwLock<TripleStore>>) -> Embedded {
        Embedded { store }
    }

    pub fn store(&self) -> Arc<RwLock<TripleStore>> {
        Arc::clone(&self.store)
    }
}

#[async_trait]
impl Endpoint for Embedded {
    async fn query(&self, plan: &QueryPlan, _text: &str) -> Result<SolutionTable, EndpointError> {
        Ok(self.store.read().expect("store lock poisoned").eval(plan))
    }

    async fn update(&self, plan: &UpdatePlan, _text: &str) -> Result<(), EndpointError> {
        if !plan.is_empty() {
            self.store.write().expect("store lock poisoned").apply(plan);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Auth {
    Bearer(String),
    Basic { user: String, password: Option<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndpointConfig {
    pub query_url: String,
    pub update_url: String,
    pub timeout: Duration,
    pub auth: Option<Auth>,
}

impl EndpointConfig {
    pub fn new(query_url: impl Into<String>) -> EndpointConfig {
        let query_url = query_url.into();
        EndpointConfig { update_url: query_url.clone(), query_url, timeout: Duration::from_secs(30), auth: None }
    }
}

#[derive(Debug, Clone)]
pub struct RemoteHttp {
    config: EndpointConfig,
    client: reqwest::Client,
}

impl RemoteHttp {
    pub fn new(config: EndpointConfig) -> Result<RemoteHttp, EndpointError> {
        let client = reqwest::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| EndpointError::Unreachable(e.to_string()))?;
        Ok(RemoteHttp { config, client })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    async fn post(&self, url: &str, field: &str, text: &str) -> Result<reqwest::Response, reqwest::Error> {
        let mut request = self.client.post(url).header(ACCEPT, RESULTS_MEDIA_TYPE).form(&[(field, text)]);
        request = match &self.config.auth {
            Some(Auth::Bearer(token)) => request.header(AUTHORIZATION, format!("Bearer {token}")),
            Some(Auth::Basic { user, password }) => request.basic_auth(user, password.as_deref()),
            None => request,
        };
        request.send().await
    }

    async fn checked(response: reqwest::Response) -> Result<String, EndpointError> {
        let status = response.status();
        let body = response.text().await.map_err(|e| EndpointError::Unreachable(e.to_string()))?;
        if !status.is_success() {
            return Err(EndpointError::Upstream { status: status.as_u16(), body });
        }
        Ok(body)
    }
}

fn unreachable(e: reqwest::Error) -> EndpointError {
    EndpointError::Unreachable(e.to_string())
}

#[async_trait]
impl Endpoint for RemoteHttp {
    async fn query(&self, _plan: &QueryPlan, text: &str) -> Result<SolutionTable, EndpointError> {
        let url = &self.config.query_url;
        // queries are idempotent: one retry when the connection fails
        let response = match self.post(url, "query", text).await {
            Err(e) if e.is_connect() => self.post(url, "query", text).await.map_err(unreachable)?,
            other => other.map_err(unreachable)?,
        };
        let body = Self::checked(response).await?;
        parse_sparql_json(&body).map_err(|e| EndpointError::MalformedResults(e.0))
    }

    async fn update(&self, _plan: &UpdatePlan, text: &str) -> Result<(), EndpointError> {
        if text.is_empty() {
            return Ok(());
        }
        let response = self.post(&self.config.update_url, "update", text).await.map_err(unreachable)?;
        Self::checked(response).await.map(|_| ())
    }
}
