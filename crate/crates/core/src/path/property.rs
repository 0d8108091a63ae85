//! Bracketed property-path expressions, SPARQL 1.1 precedence.

use std::fmt;

use thiserror::Error;

use crate::namespace::IdToken;
use crate::term::vocab;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropertyPathError {
    #[error("unbalanced parentheses in property path")]
    UnbalancedParens,
    #[error("unexpected `{0}` in property path")]
    UnknownOperator(char),
    #[error("empty operand in property path")]
    EmptyAlternative,
    #[error("invalid term `{0}` in property path")]
    InvalidTerm(String),
}

/// Property path tree. `Sequence` and `Alternative` always hold at least two
/// operands; grouping parentheses are not kept as nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PropertyPath<T> {
    Link(T),
    Inverse(Box<PropertyPath<T>>),
    Sequence(Vec<PropertyPath<T>>),
    Alternative(Vec<PropertyPath<T>>),
    ZeroOrMore(Box<PropertyPath<T>>),
    OneOrMore(Box<PropertyPath<T>>),
    ZeroOrOne(Box<PropertyPath<T>>),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Context {
    Top,
    AltItem,
    SeqItem,
    Elt,
    Primary,
}

impl<T> PropertyPath<T> {
    pub fn try_map<U, E>(&self, f: &mut impl FnMut(&T) -> Result<U, E>) -> Result<PropertyPath<U>, E> {
        Ok(match self {
            PropertyPath::Link(t) => PropertyPath::Link(f(t)?),
            PropertyPath::Inverse(p) => PropertyPath::Inverse(Box::new(p.try_map(f)?)),
            PropertyPath::ZeroOrMore(p) => PropertyPath::ZeroOrMore(Box::new(p.try_map(f)?)),
            PropertyPath::OneOrMore(p) => PropertyPath::OneOrMore(Box::new(p.try_map(f)?)),
            PropertyPath::ZeroOrOne(p) => PropertyPath::ZeroOrOne(Box::new(p.try_map(f)?)),
            PropertyPath::Sequence(ps) => {
                PropertyPath::Sequence(ps.iter().map(|p| p.try_map(f)).collect::<Result<_, _>>()?)
            }
            PropertyPath::Alternative(ps) => {
                PropertyPath::Alternative(ps.iter().map(|p| p.try_map(f)).collect::<Result<_, _>>()?)
            }
        })
    }

    pub fn leaves(&self) -> Vec<&T> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a T>) {
        match self {
            PropertyPath::Link(t) => out.push(t),
            PropertyPath::Inverse(p) | PropertyPath::ZeroOrMore(p) | PropertyPath::OneOrMore(p) | PropertyPath::ZeroOrOne(p) => {
                p.collect_leaves(out)
            }
            PropertyPath::Sequence(ps) | PropertyPath::Alternative(ps) => ps.iter().for_each(|p| p.collect_leaves(out)),
        }
    }

    /// Writes the expression with the minimal parentheses that preserve the
    /// tree, rendering leaves through `leaf`.
    pub fn write_with(&self, out: &mut String, leaf: &mut impl FnMut(&T, &mut String)) {
        self.write_in(Context::Top, out, leaf)
    }

    fn write_in(&self, ctx: Context, out: &mut String, leaf: &mut impl FnMut(&T, &mut String)) {
        let parens = match self {
            PropertyPath::Link(_) => false,
            PropertyPath::Alternative(_) => ctx != Context::Top,
            PropertyPath::Sequence(_) => !matches!(ctx, Context::Top | Context::AltItem),
            PropertyPath::Inverse(_) => matches!(ctx, Context::Elt | Context::Primary),
            PropertyPath::ZeroOrMore(_) | PropertyPath::OneOrMore(_) | PropertyPath::ZeroOrOne(_) => ctx == Context::Primary,
        };
        if parens {
            out.push('(');
        }
        match self {
            PropertyPath::Link(t) => leaf(t, out),
            PropertyPath::Inverse(p) => {
                out.push('^');
                p.write_in(Context::Elt, out, leaf);
            }
            PropertyPath::ZeroOrMore(p) => {
                p.write_in(Context::Primary, out, leaf);
                out.push('*');
            }
            PropertyPath::OneOrMore(p) => {
                p.write_in(Context::Primary, out, leaf);
                out.push('+');
            }
            PropertyPath::ZeroOrOne(p) => {
                p.write_in(Context::Primary, out, leaf);
                out.push('?');
            }
            PropertyPath::Sequence(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        out.push('/');
                    }
                    p.write_in(Context::SeqItem, out, leaf);
                }
            }
            PropertyPath::Alternative(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        out.push('|');
                    }
                    p.write_in(Context::AltItem, out, leaf);
                }
            }
        }
        if parens {
            out.push(')');
        }
    }
}

impl fmt::Display for PropertyPath<IdToken> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.write_with(&mut out, &mut |t, out| out.push_str(&t.to_string()));
        f.write_str(&out)
    }
}

const OPERATORS: &[char] = &['|', '/', '^', '(', ')', '*', '+', '?'];

/// Parses the text between the outer brackets of a property-path segment.
pub fn parse_property_path(text: &str) -> Result<PropertyPath<IdToken>, PropertyPathError> {
    let mut parser = Parser { chars: text.chars().collect(), pos: 0 };
    let path = parser.alternative()?;
    parser.skip_ws();
    match parser.peek() {
        None => Ok(path),
        Some(')') => Err(PropertyPathError::UnbalancedParens),
        Some(c) => Err(PropertyPathError::UnknownOperator(c)),
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn alternative(&mut self) -> Result<PropertyPath<IdToken>, PropertyPathError> {
        let mut items = vec![self.sequence()?];
        while self.eat('|') {
            items.push(self.sequence()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { PropertyPath::Alternative(items) })
    }

    fn sequence(&mut self) -> Result<PropertyPath<IdToken>, PropertyPathError> {
        let mut items = vec![self.elt_or_inverse()?];
        while self.eat('/') {
            items.push(self.elt_or_inverse()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { PropertyPath::Sequence(items) })
    }

    fn elt_or_inverse(&mut self) -> Result<PropertyPath<IdToken>, PropertyPathError> {
        if self.eat('^') {
            Ok(PropertyPath::Inverse(Box::new(self.elt()?)))
        } else {
            self.elt()
        }
    }

    fn elt(&mut self) -> Result<PropertyPath<IdToken>, PropertyPathError> {
        let primary = self.primary()?;
        let modified = match self.peek() {
            Some('*') => PropertyPath::ZeroOrMore(Box::new(primary)),
            Some('+') => PropertyPath::OneOrMore(Box::new(primary)),
            Some('?') => PropertyPath::ZeroOrOne(Box::new(primary)),
            _ => return Ok(primary),
        };
        self.pos += 1;
        match self.peek() {
            Some(c @ ('*' | '+' | '?')) => Err(PropertyPathError::UnknownOperator(c)),
            _ => Ok(modified),
        }
    }

    fn primary(&mut self) -> Result<PropertyPath<IdToken>, PropertyPathError> {
        match self.peek() {
            None => Err(PropertyPathError::EmptyAlternative),
            Some('(') => {
                self.pos += 1;
                if self.peek() == Some(')') {
                    return Err(PropertyPathError::EmptyAlternative);
                }
                let inner = self.alternative()?;
                if !self.eat(')') {
                    return Err(PropertyPathError::UnbalancedParens);
                }
                Ok(inner)
            }
            Some('<') => {
                let start = self.pos;
                let end = self.chars[start..]
                    .iter()
                    .position(|c| *c == '>')
                    .ok_or(PropertyPathError::UnbalancedParens)?;
                self.pos = start + end + 1;
                let token: String = self.chars[start..self.pos].iter().collect();
                IdToken::parse(&token)
                    .map(PropertyPath::Link)
                    .map_err(|_| PropertyPathError::InvalidTerm(token))
            }
            Some(c) if OPERATORS.contains(&c) => Err(PropertyPathError::EmptyAlternative),
            Some(_) => {
                let start = self.pos;
                while let Some(c) = self.chars.get(self.pos) {
                    if OPERATORS.contains(c) || c.is_whitespace() || *c == '<' || *c == '>' {
                        break;
                    }
                    self.pos += 1;
                }
                if self.pos == start {
                    return Err(PropertyPathError::UnknownOperator(self.chars[start]));
                }
                let token: String = self.chars[start..self.pos].iter().collect();
                if token == "a" {
                    return Ok(PropertyPath::Link(IdToken::Iri(vocab::RDF_TYPE.to_string())));
                }
                IdToken::parse(&token).map(PropertyPath::Link).map_err(|_| {
                    match token.chars().find(|c| !c.is_alphanumeric() && !"_-.:~%#".contains(*c)) {
                        Some(c) if token.chars().next() == Some(c) => PropertyPathError::UnknownOperator(c),
                        _ => PropertyPathError::InvalidTerm(token.clone()),
                    }
                })
            }
        }
    }
}
