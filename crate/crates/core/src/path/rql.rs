//! RQL modifiers carried in the query string: `regex`, `sort`, `limit`,
//! `count`, `sum`, `avg`.

use std::fmt;

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, CONTROLS};
use thiserror::Error;

use crate::namespace::IdToken;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RqlError {
    #[error("malformed RQL: {0}")]
    MalformedRql(String),
    #[error("unsupported RQL operator `{0}`")]
    UnsupportedRqlOperator(String),
    #[error("only one of count, sum and avg may be requested")]
    DuplicateAggregate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SortDirection {
    Ascending,
    Descending,
}

impl SortDirection {
    fn sign(self) -> char {
        match self {
            SortDirection::Ascending => '+',
            SortDirection::Descending => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggregateFn {
    Count,
    Sum,
    Avg,
}

impl AggregateFn {
    pub fn name(self) -> &'static str {
        match self {
            AggregateFn::Count => "count",
            AggregateFn::Sum => "sum",
            AggregateFn::Avg => "avg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RqlOp {
    /// Case-sensitive regular expression over the string form of the results.
    Regex(String),
    /// `key == None` sorts the results themselves, otherwise the subjects are
    /// sorted by their value for `key`.
    Sort { direction: SortDirection, key: Option<IdToken> },
    Limit { count: u64, offset: u64 },
    Aggregate(AggregateFn),
}

const QUERY_ENCODE: &AsciiSet = &CONTROLS
    .add(b' ')
    .add(b'%')
    .add(b'&')
    .add(b'#')
    .add(b',')
    .add(b'(')
    .add(b')')
    .add(b'+');

impl fmt::Display for RqlOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RqlOp::Regex(p) => write!(f, "regex({})", utf8_percent_encode(p, QUERY_ENCODE)),
            RqlOp::Sort { direction, key: None } => write!(f, "sort({})", direction.sign()),
            RqlOp::Sort { direction, key: Some(k) } => {
                write!(f, "sort({}{})", direction.sign(), utf8_percent_encode(&k.to_string(), QUERY_ENCODE))
            }
            RqlOp::Limit { count, offset: 0 } => write!(f, "limit({count})"),
            RqlOp::Limit { count, offset } => write!(f, "limit({count},{offset})"),
            RqlOp::Aggregate(a) => write!(f, "{}()", a.name()),
        }
    }
}

/// Splits at `&` and `,` outside parentheses; a backslash escapes the next
/// character from depth counting.
fn split_top_level(raw: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    let mut escaped = false;
    for (i, c) in raw.char_indices() {
        if escaped {
            escaped = false;
            continue;
        }
        match c {
            '\\' => escaped = true,
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            '&' | ',' if depth == 0 => {
                parts.push(&raw[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&raw[start..]);
    parts
}

pub fn parse_rql(raw_query: &str) -> Result<Vec<RqlOp>, RqlError> {
    if raw_query.is_empty() {
        return Ok(Vec::new());
    }
    let mut ops = Vec::new();
    for piece in split_top_level(raw_query) {
        let decoded = percent_decode_str(piece)
            .decode_utf8()
            .map_err(|_| RqlError::MalformedRql(format!("`{piece}` is not valid UTF-8")))?;
        ops.push(parse_op(&decoded)?);
    }
    let aggregates = ops.iter().filter(|op| matches!(op, RqlOp::Aggregate(_))).count();
    if aggregates > 1 {
        return Err(RqlError::DuplicateAggregate);
    }
    for (name, count) in [
        ("sort", ops.iter().filter(|op| matches!(op, RqlOp::Sort { .. })).count()),
        ("limit", ops.iter().filter(|op| matches!(op, RqlOp::Limit { .. })).count()),
    ] {
        if count > 1 {
            return Err(RqlError::MalformedRql(format!("`{name}` given more than once")));
        }
    }
    Ok(ops)
}

fn parse_op(text: &str) -> Result<RqlOp, RqlError> {
    if text.is_empty() {
        return Err(RqlError::MalformedRql("empty operator".into()));
    }
    let name_end = text.find('(').unwrap_or(text.len());
    let name = &text[..name_end];
    if !matches!(name, "regex" | "sort" | "limit" | "count" | "sum" | "avg") {
        return Err(RqlError::UnsupportedRqlOperator(name.to_string()));
    }
    let args = text[name_end..]
        .strip_prefix('(')
        .and_then(|rest| rest.strip_suffix(')'))
        .ok_or_else(|| RqlError::MalformedRql(format!("`{text}` is not of the form {name}(...)")))?;
    let malformed = |why: &str| RqlError::MalformedRql(format!("{name}: {why}"));
    match name {
        "regex" => {
            if args.is_empty() {
                return Err(malformed("pattern is empty"));
            }
            regex::Regex::new(args).map_err(|e| malformed(&e.to_string()))?;
            Ok(RqlOp::Regex(args.to_string()))
        }
        "sort" => {
            let args = args.trim();
            let direction = match args.chars().next() {
                Some('+') => SortDirection::Ascending,
                Some('-') => SortDirection::Descending,
                _ => return Err(malformed("expected `+` or `-` direction")),
            };
            let key = &args[1..];
            let key = if key.is_empty() {
                None
            } else {
                Some(IdToken::parse(key).map_err(|e| malformed(&e.to_string()))?)
            };
            Ok(RqlOp::Sort { direction, key })
        }
        "limit" => {
            let parse = |s: &str| s.trim().parse::<u64>().map_err(|_| malformed("expected a non-negative integer"));
            match args.split(',').collect::<Vec<_>>().as_slice() {
                [count] => Ok(RqlOp::Limit { count: parse(count)?, offset: 0 }),
                [count, offset] => Ok(RqlOp::Limit { count: parse(count)?, offset: parse(offset)? }),
                _ => Err(malformed("expected limit(count) or limit(count,offset)")),
            }
        }
        _ => {
            if !args.trim().is_empty() {
                return Err(malformed("takes no arguments"));
            }
            Ok(RqlOp::Aggregate(match name {
                "count" => AggregateFn::Count,
                "sum" => AggregateFn::Sum,
                _ => AggregateFn::Avg,
            }))
        }
    }
}

/// Renders ops back into a query string.
pub fn format_rql(ops: &[RqlOp]) -> String {
    ops.iter().map(ToString::to_string).collect::<Vec<_>>().join("&")
}
