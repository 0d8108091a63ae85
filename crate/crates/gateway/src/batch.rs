//! JSON-RPC 2.0 batching. Methods are the lowercase HTTP verbs with params
//! `{path, body?}`; calls run one after another in array order.

use serde_json::{json, Map, Value};

use crate::api::{Gateway, BATCH_PATH};
use crate::error::{ApiError, ErrorCode};

pub const PARSE_ERROR: i64 = -32700;
pub const INVALID_REQUEST: i64 = -32600;
pub const METHOD_NOT_FOUND: i64 = -32601;
pub const SERVER_ERROR: i64 = -32000;

fn rpc_error(id: Value, code: i64, message: &str, data: Option<Value>) -> Value {
    let mut error = json!({ "code": code, "message": message });
    if let Some(data) = data {
        error["data"] = data;
    }
    json!({ "jsonrpc": "2.0", "error": error, "id": id })
}

#[derive(Debug)]
struct Call {
    id: Value,
    method: &'static str,
    path: String,
    body: Option<Value>,
}

/// Validates one envelope; the error is a complete JSON-RPC response.
fn parse_call(item: &Value) -> Result<Call, Value> {
    let Some(obj) = item.as_object() else {
        return Err(rpc_error(Value::Null, INVALID_REQUEST, "Invalid Request: not an object", None));
    };
    let id = match obj.get("id") {
        Some(id @ (Value::String(_) | Value::Number(_))) => id.clone(),
        Some(Value::Null) | None => {
            return Err(rpc_error(Value::Null, INVALID_REQUEST, "Invalid Request: notifications are not supported", None))
        }
        Some(_) => return Err(rpc_error(Value::Null, INVALID_REQUEST, "Invalid Request: id must be a string or number", None)),
    };
    let invalid = |why: &str| rpc_error(id.clone(), INVALID_REQUEST, &format!("Invalid Request: {why}"), None);
    if obj.get("jsonrpc").and_then(Value::as_str) != Some("2.0") {
        return Err(invalid("jsonrpc must be \"2.0\""));
    }
    let method = match obj.get("method").and_then(Value::as_str) {
        Some("get") => "GET",
        Some("post") => "POST",
        Some("put") => "PUT",
        Some("delete") => "DELETE",
        Some(other) => return Err(rpc_error(id, METHOD_NOT_FOUND, &format!("Method not found: {other}"), None)),
        None => return Err(invalid("method must be a string")),
    };
    let Some(params) = obj.get("params").and_then(Value::as_object) else {
        return Err(invalid("params must be an object"));
    };
    if let Some(key) = params.keys().find(|k| !matches!(k.as_str(), "path" | "body")) {
        return Err(invalid(&format!("unknown param `{key}`")));
    }
    let path = match params.get("path").and_then(Value::as_str) {
        Some(p) if p.starts_with("/api") => p.to_string(),
        _ => return Err(invalid("params.path must be a string starting with /api")),
    };
    let body = match params.get("body") {
        None | Some(Value::Null) => None,
        Some(b) => Some(b.clone()),
    };
    Ok(Call { id, method, path, body })
}

impl Gateway {
    async fn run_call(&self, call: Call) -> Value {
        let (target_path, _) = call.path.split_once('?').unwrap_or((&call.path, ""));
        if target_path.trim_end_matches('/') == BATCH_PATH {
            let e = ApiError::new(ErrorCode::NestedBatch, "batches cannot be nested");
            return rpc_error(call.id, SERVER_ERROR, &e.message, Some(e.to_json()));
        }
        let response = self.handle(call.method, &call.path, call.body.as_ref()).await;
        if response.status >= 400 {
            let body = response.body.unwrap_or(Value::Null);
            let message = body.get("message").and_then(Value::as_str).unwrap_or("error").to_string();
            return rpc_error(call.id, SERVER_ERROR, &message, Some(body));
        }
        json!({ "jsonrpc": "2.0", "result": response.body.unwrap_or(Value::Null), "id": call.id })
    }

    /// Returns the HTTP status and the JSON-RPC response document.
    pub async fn handle_batch(&self, payload: &str) -> (u16, Value) {
        let doc: Value = match serde_json::from_str(payload) {
            Ok(doc) => doc,
            Err(e) => return (400, rpc_error(Value::Null, PARSE_ERROR, &format!("Parse error: {e}"), None)),
        };
        match doc {
            Value::Array(items) if items.is_empty() => {
                (400, rpc_error(Value::Null, INVALID_REQUEST, "Invalid Request: empty batch", None))
            }
            Value::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in &items {
                    out.push(match parse_call(item) {
                        Ok(call) => self.run_call(call).await,
                        Err(e) => e,
                    });
                }
                (200, Value::Array(out))
            }
            single => match parse_call(&single) {
                Ok(call) => (200, self.run_call(call).await),
                Err(e) => (400, e),
            },
        }
    }
}

/// Builds a request envelope.
pub fn request(id: impl Into<Value>, method: &str, path: &str, body: Option<Value>) -> Value {
    let mut params = Map::new();
    params.insert("path".into(), Value::String(path.into()));
    if let Some(body) = body {
        params.insert("body".into(), body);
    }
    json!({ "jsonrpc": "2.0", "method": method, "params": params, "id": id.into() })
}
