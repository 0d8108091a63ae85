//! API errors. Every internal failure maps to one [`ErrorCode`], and the
//! HTTP status is a function of the code alone.

use serde_json::{json, Value};
use sparql_rest::namespace::NamespaceError;
use sparql_rest::path::{PathError, PropertyPathError, RqlError};
use sparql_rest::query::CompileError;
use sparql_rest::shape::ShapeError;
use sparql_rest::update::{BodyError, UpdateError};

use crate::endpoint::EndpointError;

macro_rules! error_codes {
    ($($name:ident => $status:expr),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum ErrorCode {
            $($name),*
        }

        impl ErrorCode {
            pub const ALL: &'static [ErrorCode] = &[$(ErrorCode::$name),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(ErrorCode::$name => stringify!($name)),*
                }
            }

            pub fn status(self) -> u16 {
                match self {
                    $(ErrorCode::$name => $status),*
                }
            }
        }
    };
}

error_codes! {
    UnknownRoute => 404,
    MethodNotAllowed => 405,
    EmptyClass => 400,
    EmptyPrefixList => 400,
    MalformedSegment => 400,
    UnbalancedParens => 400,
    UnknownOperator => 400,
    EmptyAlternative => 400,
    InvalidTerm => 400,
    MalformedRql => 400,
    UnsupportedRqlOperator => 400,
    DuplicateAggregate => 400,
    UnknownPrefix => 400,
    InvalidToken => 400,
    InvalidPrefix => 400,
    UnsupportedShape => 400,
    SortKeyOnObjectView => 400,
    MalformedBody => 400,
    UnknownField => 400,
    InvalidValueObject => 400,
    PostTargetTooDeep => 400,
    PostOnWildcard => 400,
    PutOnWildcard => 400,
    PutWithPropertyPath => 400,
    PutOnPropTerminal => 400,
    PutWithoutTarget => 400,
    DeleteOnWildcard => 400,
    DeleteWithPropertyPath => 400,
    DepthOutOfRange => 400,
    LiteralSubject => 400,
    RqlNotAllowed => 400,
    NestedBatch => 400,
    UpstreamUnreachable => 502,
    UpstreamError => 502,
    MalformedResults => 502,
    ShapeMismatch => 502,
    Internal => 500,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    /// Upstream response body, when the endpoint answered with an error.
    pub detail: Option<String>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> ApiError {
        ApiError { code, message: message.into(), detail: None }
    }

    pub fn status(&self) -> u16 {
        self.code.status()
    }

    pub fn to_json(&self) -> Value {
        let mut body = json!({ "code": self.code.as_str(), "message": self.message });
        if let Some(detail) = &self.detail {
            body["detail"] = Value::String(detail.clone());
        }
        body
    }

    pub fn method_not_allowed(method: &str, route: &str) -> ApiError {
        ApiError::new(ErrorCode::MethodNotAllowed, format!("{method} is not allowed on {route}"))
    }

    pub fn unknown_route(target: &str) -> ApiError {
        ApiError::new(ErrorCode::UnknownRoute, format!("no route for `{target}`"))
    }
}

impl From<NamespaceError> for ApiError {
    fn from(e: NamespaceError) -> Self {
        let code = match &e {
            NamespaceError::UnknownPrefix(_) => ErrorCode::UnknownPrefix,
            NamespaceError::InvalidToken(_) => ErrorCode::InvalidToken,
            NamespaceError::InvalidPrefix(_) => ErrorCode::InvalidPrefix,
            _ => ErrorCode::Internal,
        };
        ApiError::new(code, e.to_string())
    }
}

impl From<PathError> for ApiError {
    fn from(e: PathError) -> Self {
        let code = match &e {
            PathError::UnknownEntryPoint(_) => ErrorCode::UnknownRoute,
            PathError::EmptyClass => ErrorCode::EmptyClass,
            PathError::EmptyPrefixList => ErrorCode::EmptyPrefixList,
            PathError::MalformedSegment { .. } => ErrorCode::MalformedSegment,
            PathError::PropertyPath { source, .. } => match source {
                PropertyPathError::UnbalancedParens => ErrorCode::UnbalancedParens,
                PropertyPathError::UnknownOperator(_) => ErrorCode::UnknownOperator,
                PropertyPathError::EmptyAlternative => ErrorCode::EmptyAlternative,
                PropertyPathError::InvalidTerm(_) => ErrorCode::InvalidTerm,
            },
            PathError::Rql(rql) => match rql {
                RqlError::MalformedRql(_) => ErrorCode::MalformedRql,
                RqlError::UnsupportedRqlOperator(_) => ErrorCode::UnsupportedRqlOperator,
                RqlError::DuplicateAggregate => ErrorCode::DuplicateAggregate,
            },
        };
        ApiError::new(code, e.to_string())
    }
}

impl From<CompileError> for ApiError {
    fn from(e: CompileError) -> Self {
        match e {
            CompileError::Namespace(ns) => ns.into(),
            CompileError::UnsupportedShape(_) => ApiError::new(ErrorCode::UnsupportedShape, e.to_string()),
            CompileError::SortKeyOnObjectView => ApiError::new(ErrorCode::SortKeyOnObjectView, e.to_string()),
            CompileError::NotAQuery => ApiError::new(ErrorCode::Internal, e.to_string()),
        }
    }
}

impl From<BodyError> for ApiError {
    fn from(e: BodyError) -> Self {
        let code = match &e {
            BodyError::MalformedBody(_) => ErrorCode::MalformedBody,
            BodyError::UnknownField(_) => ErrorCode::UnknownField,
            BodyError::InvalidValueObject(_) => ErrorCode::InvalidValueObject,
        };
        ApiError::new(code, e.to_string())
    }
}

impl From<UpdateError> for ApiError {
    fn from(e: UpdateError) -> Self {
        let code = match e {
            UpdateError::Body(body) => return body.into(),
            UpdateError::Namespace(ns) => return ns.into(),
            UpdateError::PostTargetTooDeep => ErrorCode::PostTargetTooDeep,
            UpdateError::PostOnWildcard => ErrorCode::PostOnWildcard,
            UpdateError::PutOnWildcard => ErrorCode::PutOnWildcard,
            UpdateError::PutWithPropertyPath => ErrorCode::PutWithPropertyPath,
            UpdateError::PutOnPropTerminal => ErrorCode::PutOnPropTerminal,
            UpdateError::PutWithoutTarget => ErrorCode::PutWithoutTarget,
            UpdateError::DeleteOnWildcard => ErrorCode::DeleteOnWildcard,
            UpdateError::DeleteWithPropertyPath => ErrorCode::DeleteWithPropertyPath,
            UpdateError::DepthOutOfRange(_) => ErrorCode::DepthOutOfRange,
            UpdateError::LiteralSubject => ErrorCode::LiteralSubject,
            UpdateError::RqlNotAllowed => ErrorCode::RqlNotAllowed,
            UpdateError::ReadOnlyEntry => ErrorCode::MethodNotAllowed,
        };
        ApiError::new(code, e.to_string())
    }
}

impl From<ShapeError> for ApiError {
    fn from(e: ShapeError) -> Self {
        ApiError::new(ErrorCode::ShapeMismatch, e.to_string())
    }
}

impl From<EndpointError> for ApiError {
    fn from(e: EndpointError) -> Self {
        match e {
            EndpointError::Unreachable(_) => ApiError::new(ErrorCode::UpstreamUnreachable, e.to_string()),
            EndpointError::Upstream { status, ref body } => ApiError {
                code: ErrorCode::UpstreamError,
                message: format!("endpoint answered with HTTP {status}"),
                detail: Some(body.clone()),
            },
            EndpointError::MalformedResults(_) => ApiError::new(ErrorCode::MalformedResults, e.to_string()),
        }
    }
}
