//! Request-path grammar.
//!
//! ```text
//! API_PATH = "/api" (CLASS | RESOURCE | NAMESPACE)
//! CLASS    = "/class" RES PATH
//! RESOURCE = "/resource" PATH
//! PATH     = ("/" RES "/" PROP)* ("/" RES)?
//! ```
//!
//! RQL modifiers live in the query string. Segments are split on `/` outside
//! `(...)` and `<...>`, then percent-decoded once.

mod property;
mod rql;

use std::fmt;

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, CONTROLS};
use thiserror::Error;

use crate::namespace::{is_prefix_name, IdToken};

pub use property::{parse_property_path, PropertyPath, PropertyPathError};
pub use rql::{format_rql, parse_rql, AggregateFn, RqlError, RqlOp, SortDirection};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("unknown entry point `{0}`")]
    UnknownEntryPoint(String),
    #[error("`/class` requires a class segment")]
    EmptyClass,
    #[error("`/namespace` requires a comma-separated prefix list")]
    EmptyPrefixList,
    #[error("malformed segment {index} `{segment}`: {reason}")]
    MalformedSegment { index: usize, segment: String, reason: String },
    #[error("malformed property path `{segment}`: {source}")]
    PropertyPath { segment: String, source: PropertyPathError },
    #[error(transparent)]
    Rql(#[from] RqlError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntryPoint {
    Class(ClassRef),
    Resource,
    Namespace(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassRef {
    Id(IdToken),
    Wildcard,
}

/// Literal written into a RES position, e.g. `Berlin@en`,
/// `42^^xsd:integer` or `"a b"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteralToken {
    pub lexical: String,
    pub language: Option<String>,
    pub datatype: Option<IdToken>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResRef {
    Id(IdToken),
    Literal(LiteralToken),
    Wildcard,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropRef {
    Id(IdToken),
    Wildcard,
    Path(PropertyPath<IdToken>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Res(ResRef),
    Prop(PropRef),
}

/// A parsed request path. `segments` alternate RES, PROP, RES, ... starting
/// with RES; for `/class` the class itself lives in the entry point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiPath {
    pub entry: EntryPoint,
    pub segments: Vec<Segment>,
    pub rql: Vec<RqlOp>,
}

impl ApiPath {
    /// Parses a request target (`path?query`).
    pub fn parse(target: &str) -> Result<ApiPath, PathError> {
        let (path, query) = target.split_once('?').unwrap_or((target, ""));
        parse_api_path(path, query)
    }

    /// Number of segments after the entry point.
    pub fn depth(&self) -> usize {
        self.segments.len()
    }

    pub fn ends_with_prop(&self) -> bool {
        matches!(self.segments.last(), Some(Segment::Prop(_)))
    }

    pub fn has_wildcard(&self) -> bool {
        matches!(self.entry, EntryPoint::Class(ClassRef::Wildcard))
            || self
                .segments
                .iter()
                .any(|s| matches!(s, Segment::Res(ResRef::Wildcard) | Segment::Prop(PropRef::Wildcard)))
    }

    pub fn has_property_path(&self) -> bool {
        self.segments.iter().any(|s| matches!(s, Segment::Prop(PropRef::Path(_))))
    }

    /// The path without its RQL modifiers.
    pub fn path_string(&self) -> String {
        let mut out = String::from("/api");
        match &self.entry {
            EntryPoint::Class(class) => {
                out.push_str("/class/");
                match class {
                    ClassRef::Id(id) => out.push_str(&encode_id(id)),
                    ClassRef::Wildcard => out.push('*'),
                }
            }
            EntryPoint::Resource => out.push_str("/resource"),
            EntryPoint::Namespace(prefixes) => {
                out.push_str("/namespace/");
                out.push_str(&prefixes.join(","));
            }
        }
        for segment in &self.segments {
            out.push('/');
            match segment {
                Segment::Res(ResRef::Wildcard) | Segment::Prop(PropRef::Wildcard) => out.push('*'),
                Segment::Res(ResRef::Id(id)) | Segment::Prop(PropRef::Id(id)) => out.push_str(&encode_id(id)),
                Segment::Res(ResRef::Literal(lit)) => out.push_str(&encode_token(&lit.to_string())),
                Segment::Prop(PropRef::Path(path)) => {
                    let mut expr = String::new();
                    path.write_with(&mut expr, &mut |leaf, out| out.push_str(&encode_path_leaf(&leaf.to_string())));
                    // leaves are already encoded, so any `?` left is the operator
                    out.push('(');
                    out.push_str(&expr.replace('?', "%3F"));
                    out.push(')');
                }
            }
        }
        out
    }
}

impl fmt::Display for ApiPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.path_string())?;
        if !self.rql.is_empty() {
            write!(f, "?{}", format_rql(&self.rql))?;
        }
        Ok(())
    }
}

impl fmt::Display for LiteralToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", self.lexical)?;
        if let Some(lang) = &self.language {
            write!(f, "@{lang}")?;
        }
        if let Some(dt) = &self.datatype {
            write!(f, "^^{dt}")?;
        }
        Ok(())
    }
}

const SEGMENT_ENCODE: &AsciiSet = &CONTROLS
    .add(b' ')
    .add(b'%')
    .add(b'/')
    .add(b'?')
    .add(b'#')
    .add(b'(')
    .add(b'<')
    .add(b'>')
    .add(b'"')
    .add(b'`')
    .add(b'{')
    .add(b'}');

const LEAF_ENCODE: &AsciiSet = &CONTROLS.add(b' ').add(b'%').add(b'?').add(b'#');

/// Percent-encodes a single segment token so that it survives splitting.
pub fn encode_token(token: &str) -> String {
    utf8_percent_encode(token, SEGMENT_ENCODE).to_string()
}

/// Like [`encode_token`], but leaves `<...>` IRIs readable.
pub fn encode_id(id: &IdToken) -> String {
    match id {
        IdToken::Iri(iri) => format!("<{}>", utf8_percent_encode(iri, LEAF_ENCODE)),
        other => encode_token(&other.to_string()),
    }
}

fn encode_path_leaf(token: &str) -> String {
    utf8_percent_encode(token, LEAF_ENCODE).to_string()
}

/// Splits on `/` outside `(...)` and `<...>`. Brackets only open at the start
/// of a segment or inside an open group.
fn split_segments(raw: &str) -> Vec<&str> {
    let mut segments = Vec::new();
    let mut depth = 0usize;
    let mut in_angle = false;
    let mut at_start = true;
    let mut start = 0;
    for (i, c) in raw.char_indices() {
        if in_angle {
            if c == '>' {
                in_angle = false;
            }
            at_start = false;
            continue;
        }
        match c {
            '<' if at_start || depth > 0 => in_angle = true,
            '(' if at_start || depth > 0 => depth += 1,
            ')' if depth > 0 => depth -= 1,
            '/' if depth == 0 => {
                segments.push(&raw[start..i]);
                start = i + 1;
                at_start = true;
                continue;
            }
            _ => {}
        }
        at_start = false;
    }
    segments.push(&raw[start..]);
    segments
}

/// Parses the (still percent-encoded) request path and the raw query string.
pub fn parse_api_path(raw_path: &str, raw_query: &str) -> Result<ApiPath, PathError> {
    let rest = match raw_path.strip_prefix("/api") {
        Some("") => return Err(PathError::UnknownEntryPoint(String::new())),
        Some(rest) if rest.starts_with('/') => &rest[1..],
        _ => return Err(PathError::UnknownEntryPoint(raw_path.to_string())),
    };
    // a single trailing slash is tolerated
    let rest = rest.strip_suffix('/').unwrap_or(rest);
    let raw_segments = split_segments(rest);
    let mut decoded = Vec::with_capacity(raw_segments.len());
    for (index, raw) in raw_segments.iter().enumerate() {
        let text = percent_decode_str(raw).decode_utf8().map_err(|_| PathError::MalformedSegment {
            index,
            segment: raw.to_string(),
            reason: "not valid UTF-8 after percent-decoding".into(),
        })?;
        decoded.push(text.into_owned());
    }
    let rql = parse_rql(raw_query)?;
    let entry_name = decoded[0].as_str();
    let (entry, body) = match entry_name {
        "class" => {
            let class = decoded.get(1).filter(|s| !s.is_empty()).ok_or(PathError::EmptyClass)?;
            let class = match class.as_str() {
                "*" => ClassRef::Wildcard,
                token => ClassRef::Id(IdToken::parse(token).map_err(|e| PathError::MalformedSegment {
                    index: 1,
                    segment: token.to_string(),
                    reason: e.to_string(),
                })?),
            };
            (EntryPoint::Class(class), &decoded[2..])
        }
        "resource" => (EntryPoint::Resource, &decoded[1..]),
        "namespace" => {
            if !rql.is_empty() {
                return Err(RqlError::MalformedRql("`/namespace` takes no modifiers".into()).into());
            }
            return parse_namespace(&decoded[1..]);
        }
        other => return Err(PathError::UnknownEntryPoint(other.to_string())),
    };
    let offset = decoded.len() - body.len();
    let segments = body
        .iter()
        .enumerate()
        .map(|(i, text)| parse_segment(i, offset + i, text))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ApiPath { entry, segments, rql })
}

fn parse_namespace(rest: &[String]) -> Result<ApiPath, PathError> {
    match rest {
        [] => Err(PathError::EmptyPrefixList),
        [list] if list.is_empty() => Err(PathError::EmptyPrefixList),
        [list] => {
            let prefixes: Vec<String> = list.split(',').map(str::to_string).collect();
            if let Some(bad) = prefixes.iter().find(|p| !is_prefix_name(p)) {
                return Err(PathError::MalformedSegment {
                    index: 1,
                    segment: list.clone(),
                    reason: format!("`{bad}` is not a valid prefix name"),
                });
            }
            Ok(ApiPath { entry: EntryPoint::Namespace(prefixes), segments: Vec::new(), rql: Vec::new() })
        }
        _ => Err(PathError::MalformedSegment {
            index: 2,
            segment: rest[1].clone(),
            reason: "`/namespace` takes a single prefix list".into(),
        }),
    }
}

/// Role is decided by parity: even positions are RES, odd ones PROP.
fn parse_segment(position: usize, index: usize, text: &str) -> Result<Segment, PathError> {
    let malformed = |reason: &str| PathError::MalformedSegment {
        index,
        segment: text.to_string(),
        reason: reason.to_string(),
    };
    if text.is_empty() {
        return Err(malformed("empty segment"));
    }
    if text == "*" {
        return Ok(if position % 2 == 0 { Segment::Res(ResRef::Wildcard) } else { Segment::Prop(PropRef::Wildcard) });
    }
    if position % 2 == 1 {
        if let Some(inner) = text.strip_prefix('(') {
            let inner = inner
                .strip_suffix(')')
                .ok_or_else(|| PathError::PropertyPath { segment: text.into(), source: PropertyPathError::UnbalancedParens })?;
            let path = parse_property_path(inner)
                .map_err(|source| PathError::PropertyPath { segment: text.into(), source })?;
            return Ok(Segment::Prop(PropRef::Path(path)));
        }
        return match IdToken::parse(text) {
            Ok(IdToken::BNode(_)) => Err(malformed("a blank node cannot be a property")),
            Ok(id) => Ok(Segment::Prop(PropRef::Id(id))),
            Err(e) if looks_like_literal(text) => Err(malformed(&format!("a literal cannot be a property ({e})"))),
            Err(e) => Err(malformed(&e.to_string())),
        };
    }
    if text.starts_with('(') {
        return Err(malformed("a property path cannot stand in a resource position"));
    }
    if let Some(literal) = parse_literal_token(text).map_err(|e| malformed(&e))? {
        return Ok(Segment::Res(ResRef::Literal(literal)));
    }
    IdToken::parse(text)
        .map(|id| Segment::Res(ResRef::Id(id)))
        .map_err(|e| malformed(&e.to_string()))
}

fn looks_like_literal(text: &str) -> bool {
    matches!(parse_literal_token(text), Ok(Some(_)))
}

pub(crate) fn is_language_tag(s: &str) -> bool {
    let mut parts = s.split('-');
    let first = parts.next().unwrap_or_default();
    (1..=8).contains(&first.len())
        && first.chars().all(|c| c.is_ascii_alphabetic())
        && parts.all(|p| (1..=8).contains(&p.len()) && p.chars().all(|c| c.is_ascii_alphanumeric()))
}

/// Recognizes the literal path-token forms. `Ok(None)` means the token is
/// not a literal.
pub fn parse_literal_token(text: &str) -> Result<Option<LiteralToken>, String> {
    let suffix = |lexical: &str, rest: &str| -> Result<LiteralToken, String> {
        if rest.is_empty() {
            Ok(LiteralToken { lexical: lexical.into(), language: None, datatype: None })
        } else if let Some(lang) = rest.strip_prefix('@') {
            if !is_language_tag(lang) {
                return Err(format!("`{lang}` is not a language tag"));
            }
            Ok(LiteralToken { lexical: lexical.into(), language: Some(lang.into()), datatype: None })
        } else if let Some(dt) = rest.strip_prefix("^^") {
            let dt = IdToken::parse(dt).map_err(|e| e.to_string())?;
            Ok(LiteralToken { lexical: lexical.into(), language: None, datatype: Some(dt) })
        } else {
            Err(format!("unexpected `{rest}` after quoted literal"))
        }
    };
    if let Some(body) = text.strip_prefix('"') {
        let close = body.rfind('"').ok_or("unterminated quoted literal")?;
        return suffix(&body[..close], &body[close + 1..]).map(Some);
    }
    if let Some(pos) = text.rfind("^^") {
        return suffix(&text[..pos], &text[pos..]).map(Some);
    }
    if let Some(pos) = text.rfind('@') {
        let (lexical, lang) = (&text[..pos], &text[pos + 1..]);
        if !lexical.contains(':') && is_language_tag(lang) {
            return suffix(lexical, &text[pos..]).map(Some);
        }
    }
    Ok(None)
}
