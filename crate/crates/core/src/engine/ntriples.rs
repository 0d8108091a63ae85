//! Line-based N-Triples reader.

use thiserror::Error;

use crate::term::{Literal, Term, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("N-Triples line {line}: {message}")]
pub struct NTriplesError {
    pub line: usize,
    pub message: String,
}

pub fn parse_ntriples(text: &str) -> Result<Vec<Triple>, NTriplesError> {
    let mut triples = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let fail = |message: String| NTriplesError { line: index + 1, message };
        let mut cursor = Cursor { rest: line.trim() };
        if cursor.rest.is_empty() || cursor.rest.starts_with('#') {
            continue;
        }
        let subject = match cursor.term().map_err(fail)? {
            Term::Literal(_) => return Err(fail("subject must be an IRI or blank node".into())),
            t => t,
        };
        let predicate = match cursor.term().map_err(fail)? {
            t @ Term::Iri(_) => t,
            _ => return Err(fail("predicate must be an IRI".into())),
        };
        let object = cursor.term().map_err(fail)?;
        cursor.skip_ws();
        if !cursor.eat('.') {
            return Err(fail("expected `.`".into()));
        }
        cursor.skip_ws();
        if !cursor.rest.is_empty() && !cursor.rest.starts_with('#') {
            return Err(fail(format!("unexpected trailing `{}`", cursor.rest)));
        }
        triples.push(Triple::new(subject, predicate, object));
    }
    Ok(triples)
}

struct Cursor<'a> {
    rest: &'a str,
}

impl Cursor<'_> {
    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t']);
    }

    fn eat(&mut self, c: char) -> bool {
        match self.rest.strip_prefix(c) {
            Some(rest) => {
                self.rest = rest;
                true
            }
            None => false,
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let end = self.rest.find(|c| !f(c)).unwrap_or(self.rest.len());
        let (taken, rest) = self.rest.split_at(end);
        self.rest = rest;
        taken.to_string()
    }

    fn term(&mut self) -> Result<Term, String> {
        self.skip_ws();
        if self.eat('<') {
            Ok(Term::iri(self.iri_body()?))
        } else if self.rest.starts_with("_:") {
            self.rest = &self.rest[2..];
            let end = self
                .rest
                .find(|c: char| !(c.is_alphanumeric() || matches!(c, '_' | '-' | '.')))
                .unwrap_or(self.rest.len());
            // a trailing `.` ends the statement, not the label
            let label = self.rest[..end].trim_end_matches('.').to_string();
            self.rest = &self.rest[label.len()..];
            if label.is_empty() {
                return Err("empty blank node label".into());
            }
            Ok(Term::BNode(label.to_string()))
        } else if self.eat('"') {
            let lexical = self.string_body()?;
            if self.eat('@') {
                let lang = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                if lang.is_empty() {
                    return Err("empty language tag".into());
                }
                Ok(Term::Literal(Literal::lang(lexical, lang)))
            } else if self.rest.starts_with("^^") {
                self.rest = &self.rest[2..];
                if !self.eat('<') {
                    return Err("datatype must be an IRI".into());
                }
                Ok(Term::Literal(Literal::typed(lexical, self.iri_body()?)))
            } else {
                Ok(Term::Literal(Literal::string(lexical)))
            }
        } else {
            Err(format!("unexpected `{}`", self.rest.chars().next().map(String::from).unwrap_or_default()))
        }
    }

    fn iri_body(&mut self) -> Result<String, String> {
        let mut out = String::new();
        let mut chars = self.rest.char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '>' => {
                    self.rest = &self.rest[i + 1..];
                    return Ok(out);
                }
                '\\' => out.push(unicode_escape(&mut chars)?),
                c if c <= ' ' || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    return Err(format!("character {c:?} not allowed in an IRI"))
                }
                c => out.push(c),
            }
        }
        Err("unterminated IRI".into())
    }

    fn string_body(&mut self) -> Result<String, String> {
        let mut out = String::new();
        let mut chars = self.rest.char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.rest = &self.rest[i + 1..];
                    return Ok(out);
                }
                '\\' => {
                    let mut peek = chars.clone();
                    match peek.next().map(|(_, c)| c) {
                        Some('t') => out.push('\t'),
                        Some('b') => out.push('\u{8}'),
                        Some('n') => out.push('\n'),
                        Some('r') => out.push('\r'),
                        Some('f') => out.push('\u{c}'),
                        Some('"') => out.push('"'),
                        Some('\'') => out.push('\''),
                        Some('\\') => out.push('\\'),
                        Some('u' | 'U') => {
                            out.push(unicode_escape(&mut chars)?);
                            continue;
                        }
                        _ => return Err("invalid string escape".into()),
                    }
                    chars.next();
                }
                c => out.push(c),
            }
        }
        Err("unterminated string".into())
    }
}

/// Reads `uXXXX` or `UXXXXXXXX` after a backslash.
fn unicode_escape(chars: &mut std::str::CharIndices<'_>) -> Result<char, String> {
    let width = match chars.next().map(|(_, c)| c) {
        Some('u') => 4,
        Some('U') => 8,
        _ => return Err("invalid escape".into()),
    };
    let hex: String = chars.by_ref().take(width).map(|(_, c)| c).collect();
    if hex.len() != width {
        return Err("truncated unicode escape".into());
    }
    u32::from_str_radix(&hex, 16)
        .ok()
        .and_then(char::from_u32)
        .ok_or_else(|| format!("invalid code point \\u{hex}"))
}
