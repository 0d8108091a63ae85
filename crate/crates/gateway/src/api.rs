//! Method dispatch for `/api/class`, `/api/resource` and `/api/namespace`.

use std::sync::Arc;
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use sparql_rest::path::{encode_id, EntryPoint};
use sparql_rest::query::{compile_get, CompileOptions};
use sparql_rest::shape::shape;
use sparql_rest::sparql::{serialize_sparql, serialize_update};
use sparql_rest::update::{compile_delete, compile_post, compile_put, parse_body, BodyObject, UpdatePlan};
use sparql_rest::{ApiPath, IdToken, PrefixMap, Term};

use crate::endpoint::Endpoint;
use crate::error::{ApiError, ErrorCode};
use crate::mint::IdMinter;

pub const BATCH_PATH: &str = "/api/batch";

/// What the gateway sent upstream while serving one request.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub sparql: Vec<String>,
    pub upstream: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiResponse {
    pub status: u16,
    /// `None` for 204.
    pub body: Option<Value>,
    pub location: Option<String>,
    pub trace: Trace,
}

impl ApiResponse {
    fn error(e: ApiError, trace: Trace) -> ApiResponse {
        ApiResponse { status: e.status(), body: Some(e.to_json()), location: None, trace }
    }

    /// The body as sent on the wire.
    pub fn body_bytes(&self) -> Vec<u8> {
        self.body.as_ref().map(|b| serde_json::to_vec(b).expect("JSON values serialize")).unwrap_or_default()
    }
}

pub struct Gateway {
    prefixes: PrefixMap,
    endpoint: Arc<dyn Endpoint>,
    minter: IdMinter,
    options: CompileOptions,
}

struct Success {
    status: u16,
    body: Option<Value>,
    location: Option<String>,
}

impl Success {
    fn ok(body: Value) -> Success {
        Success { status: 200, body: Some(body), location: None }
    }
}

impl Gateway {
    pub fn new(prefixes: PrefixMap, endpoint: Arc<dyn Endpoint>, minter: IdMinter, options: CompileOptions) -> Gateway {
        Gateway { prefixes, endpoint, minter, options }
    }

    pub fn prefixes(&self) -> &PrefixMap {
        &self.prefixes
    }

    /// Handles one request whose body is raw text; an empty body is absent.
    pub async fn handle_text(&self, method: &str, target: &str, body: &str) -> ApiResponse {
        if body.trim().is_empty() {
            return self.handle(method, target, None).await;
        }
        match serde_json::from_str::<Value>(body) {
            Ok(json) => self.handle(method, target, Some(&json)).await,
            Err(e) => ApiResponse::error(ApiError::new(ErrorCode::MalformedBody, format!("body is not JSON: {e}")), Trace::default()),
        }
    }

    pub async fn handle(&self, method: &str, target: &str, body: Option<&Value>) -> ApiResponse {
        let mut trace = Trace::default();
        match self.dispatch(method, target, body, &mut trace).await {
            Ok(s) => ApiResponse { status: s.status, body: s.body, location: s.location, trace },
            Err(e) => ApiResponse::error(e, trace),
        }
    }

    async fn dispatch(&self, method: &str, target: &str, body: Option<&Value>, trace: &mut Trace) -> Result<Success, ApiError> {
        let path = ApiPath::parse(target)?;
        if let EntryPoint::Namespace(list) = &path.entry {
            if method != "GET" {
                return Err(ApiError::method_not_allowed(method, "/api/namespace"));
            }
            if !path.rql.is_empty() {
                return Err(ApiError::new(ErrorCode::RqlNotAllowed, "`/namespace` takes no modifiers"));
            }
            let resolution = self.prefixes.resolve_prefixes(&list.join(","))?;
            return Ok(Success::ok(json!({ "namespaces": resolution.namespaces, "unknown": resolution.unknown })));
        }
        match method {
            "GET" => self.get(&path, trace).await.map(Success::ok),
            "POST" => {
                let body = body_object(body)?;
                let mut mint = || self.minter.mint();
                let (plan, minted) = compile_post(&path, &body, &mut mint, &self.prefixes)?;
                self.update(&plan, trace).await?;
                let id = self.prefixes.compact(&minted);
                Ok(Success { status: 201, location: Some(self.location(&minted)), body: Some(json!({ "ids": [id] })) })
            }
            "PUT" => {
                let body = body_object(body)?;
                let mut mint = || self.minter.mint();
                let plan = compile_put(&path, &body, &mut mint, &self.prefixes)?;
                self.update(&plan, trace).await?;
                self.get(&path, trace).await.map(Success::ok)
            }
            "DELETE" => {
                let plan = compile_delete(&path, &self.prefixes)?;
                self.update(&plan, trace).await?;
                Ok(Success { status: 204, body: None, location: None })
            }
            other => Err(ApiError::method_not_allowed(other, &path.path_string())),
        }
    }

    async fn get(&self, path: &ApiPath, trace: &mut Trace) -> Result<Value, ApiError> {
        let compiled = compile_get(path, &self.prefixes, self.options)?;
        let text = serialize_sparql(&compiled.plan, &self.prefixes);
        let started = Instant::now();
        let result = self.endpoint.query(&compiled.plan, &text).await;
        trace.upstream += started.elapsed();
        trace.sparql.push(text);
        Ok(shape(&result?, &compiled.shape, &self.prefixes)?)
    }

    async fn update(&self, plan: &UpdatePlan, trace: &mut Trace) -> Result<(), ApiError> {
        let text = serialize_update(plan, &self.prefixes);
        let started = Instant::now();
        let result = self.endpoint.update(plan, &text).await;
        trace.upstream += started.elapsed();
        trace.sparql.push(text);
        Ok(result?)
    }

    fn location(&self, minted: &Term) -> String {
        let token = IdToken::parse(&self.prefixes.compact(minted)).expect("compacted ids are valid tokens");
        format!("/api/resource/{}", encode_id(&token))
    }
}

fn body_object(body: Option<&Value>) -> Result<BodyObject, ApiError> {
    match body {
        None => Ok(BodyObject::default()),
        Some(json) => Ok(parse_body(json)?),
    }
}
