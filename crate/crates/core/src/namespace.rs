//! Prefix map, CURIE expansion and IRI compaction.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::term::{vocab, Term, SKOLEM_PREFIX};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NamespaceError {
    #[error("unknown prefix `{0}`")]
    UnknownPrefix(String),
    #[error("`{0}` is not a CURIE, <IRI> or _:label")]
    InvalidToken(String),
    #[error("`{0}` is not a valid prefix name")]
    InvalidPrefix(String),
    #[error("`{0}` is not an absolute IRI")]
    InvalidNamespace(String),
    #[error("prefix `{0}` is declared twice")]
    DuplicatePrefix(String),
    #[error("prefix file line {line}: {message}")]
    PrefixFile { line: usize, message: String },
    #[error("cannot read prefix file: {0}")]
    Io(String),
}

/// Built-in prefixes available without configuration.
pub const DEFAULT_PREFIXES: &[(&str, &str)] = &[
    ("dbo", "http://dbpedia.org/ontology/"),
    ("dbr", "http://dbpedia.org/resource/"),
    ("ex", "http://example.org/"),
    ("foaf", "http://xmlns.com/foaf/0.1/"),
    ("owl", "http://www.w3.org/2002/07/owl#"),
    ("rdf", vocab::RDF),
    ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
    ("skos", "http://www.w3.org/2004/02/skos/core#"),
    ("xsd", vocab::XSD),
];

/// An identifier as written in a path, a body or a prefix-map lookup.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdToken {
    Curie { prefix: String, local: String },
    Iri(String),
    BNode(String),
}

impl IdToken {
    pub fn parse(token: &str) -> Result<IdToken, NamespaceError> {
        let invalid = || NamespaceError::InvalidToken(token.to_string());
        if let Some(inner) = token.strip_prefix('<') {
            let iri = inner.strip_suffix('>').ok_or_else(invalid)?;
            if let Some(label) = iri.strip_prefix(SKOLEM_PREFIX) {
                if is_bnode_label(label) {
                    return Ok(IdToken::BNode(label.to_string()));
                }
                return Err(invalid());
            }
            if !is_absolute_iri(iri) {
                return Err(invalid());
            }
            return Ok(IdToken::Iri(iri.to_string()));
        }
        if let Some(label) = token.strip_prefix(SKOLEM_PREFIX) {
            return if is_bnode_label(label) {
                Ok(IdToken::BNode(label.to_string()))
            } else {
                Err(invalid())
            };
        }
        let (prefix, local) = token.split_once(':').ok_or_else(invalid)?;
        if !is_prefix_name(prefix) || local.is_empty() || local.contains('/') {
            return Err(invalid());
        }
        Ok(IdToken::Curie {
            prefix: prefix.to_string(),
            local: local.to_string(),
        })
    }
}

impl fmt::Display for IdToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdToken::Curie { prefix, local } => write!(f, "{prefix}:{local}"),
            IdToken::Iri(iri) => write!(f, "<{iri}>"),
            IdToken::BNode(label) => write!(f, "_:{label}"),
        }
    }
}

/// `[A-Za-z][A-Za-z0-9_-]*`
pub fn is_prefix_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn is_bnode_label(s: &str) -> bool {
    !s.is_empty() && !s.contains(['/', '<', '>', ' '])
}

/// Scheme followed by `:` and no characters that IRIs forbid.
pub fn is_absolute_iri(s: &str) -> bool {
    let Some((scheme, rest)) = s.split_once(':') else {
        return false;
    };
    let mut chars = scheme.chars();
    let scheme_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    scheme_ok
        && !rest
            .chars()
            .any(|c| c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '\\' | '^' | '`'))
}

/// Prefix → namespace IRI map. Immutable once the service starts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixMap {
    entries: BTreeMap<String, String>,
    /// Longest namespace first, then smallest prefix.
    by_length: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, serde::Serialize)]
pub struct PrefixResolution {
    pub namespaces: BTreeMap<String, String>,
    pub unknown: Vec<String>,
}

impl PrefixMap {
    pub fn new() -> PrefixMap {
        PrefixMap::default()
    }

    pub fn with_defaults() -> PrefixMap {
        let mut map = PrefixMap::new();
        for (prefix, ns) in DEFAULT_PREFIXES {
            map.insert(prefix, ns).expect("valid default prefix");
        }
        map
    }

    pub fn insert(&mut self, prefix: &str, namespace: &str) -> Result<(), NamespaceError> {
        if !is_prefix_name(prefix) {
            return Err(NamespaceError::InvalidPrefix(prefix.to_string()));
        }
        if !is_absolute_iri(namespace) {
            return Err(NamespaceError::InvalidNamespace(namespace.to_string()));
        }
        self.entries.insert(prefix.to_string(), namespace.to_string());
        self.reindex();
        Ok(())
    }

    fn reindex(&mut self) {
        let mut by_length: Vec<_> = self.entries.iter().map(|(p, n)| (p.clone(), n.clone())).collect();
        by_length.sort_by(|(pa, na), (pb, nb)| nb.len().cmp(&na.len()).then_with(|| pa.cmp(pb)));
        self.by_length = by_length;
    }

    /// Parses a `prefix<TAB>namespace` file. Blank lines and `#` comments are
    /// skipped; a prefix may only be declared once per file.
    pub fn parse_prefix_file(text: &str) -> Result<PrefixMap, NamespaceError> {
        let mut map = PrefixMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
                continue;
            }
            let (prefix, ns) = trimmed.split_once('\t').ok_or_else(|| NamespaceError::PrefixFile {
                line: line_no,
                message: "expected `prefix<TAB>namespace`".into(),
            })?;
            let (prefix, ns) = (prefix.trim(), ns.trim());
            if map.entries.contains_key(prefix) {
                return Err(NamespaceError::PrefixFile {
                    line: line_no,
                    message: NamespaceError::DuplicatePrefix(prefix.into()).to_string(),
                });
            }
            map.insert(prefix, ns).map_err(|e| NamespaceError::PrefixFile {
                line: line_no,
                message: e.to_string(),
            })?;
        }
        Ok(map)
    }

    pub fn load_prefix_file(path: &Path) -> Result<PrefixMap, NamespaceError> {
        let text = std::fs::read_to_string(path).map_err(|e| NamespaceError::Io(format!("{}: {e}", path.display())))?;
        PrefixMap::parse_prefix_file(&text)
    }

    /// Entries of `other` override entries of `self`.
    pub fn merged(mut self, other: &PrefixMap) -> PrefixMap {
        for (p, n) in &other.entries {
            self.entries.insert(p.clone(), n.clone());
        }
        self.reindex();
        self
    }

    pub fn namespace(&self, prefix: &str) -> Option<&str> {
        self.entries.get(prefix).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(p, n)| (p.as_str(), n.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Expands a path/body token into a term.
    pub fn expand(&self, token: &str) -> Result<Term, NamespaceError> {
        self.expand_token(&IdToken::parse(token)?)
    }

    pub fn expand_token(&self, token: &IdToken) -> Result<Term, NamespaceError> {
        match token {
            IdToken::Curie { prefix, local } => {
                let ns = self
                    .namespace(prefix)
                    .ok_or_else(|| NamespaceError::UnknownPrefix(prefix.clone()))?;
                Ok(Term::iri(format!("{ns}{local}")))
            }
            IdToken::Iri(iri) => Ok(Term::iri(iri.clone())),
            IdToken::BNode(label) => Ok(Term::BNode(label.clone())),
        }
    }

    /// Splits an IRI into `(prefix, local)` using the longest matching
    /// namespace whose remainder is a usable CURIE local part.
    pub fn split_iri<'a>(&'a self, iri: &'a str) -> Option<(&'a str, &'a str)> {
        self.by_length.iter().find_map(|(prefix, ns)| {
            let local = iri.strip_prefix(ns.as_str())?;
            (!local.is_empty() && !local.contains('/')).then_some((prefix.as_str(), local))
        })
    }

    pub fn compact_iri(&self, iri: &str) -> String {
        if let Some(label) = iri.strip_prefix(SKOLEM_PREFIX).filter(|l| is_bnode_label(l)) {
            return format!("{SKOLEM_PREFIX}{label}");
        }
        match self.split_iri(iri) {
            Some((prefix, local)) => format!("{prefix}:{local}"),
            None => format!("<{iri}>"),
        }
    }

    /// Id string for a node. Literals (which have no id) render as their
    /// quoted path-token form.
    pub fn compact(&self, term: &Term) -> String {
        match term {
            Term::Iri(iri) => self.compact_iri(iri),
            Term::BNode(label) => format!("{SKOLEM_PREFIX}{label}"),
            Term::Literal(l) => {
                let mut out = format!("\"{}\"", l.lexical);
                if let Some(lang) = &l.language {
                    out.push('@');
                    out.push_str(lang);
                } else if l.datatype != vocab::XSD_STRING {
                    out.push_str("^^");
                    out.push_str(&self.compact_iri(&l.datatype));
                }
                out
            }
        }
    }

    /// Resolves a comma-separated list of prefixes. Unknown prefixes are
    /// reported, not treated as failures.
    pub fn resolve_prefixes(&self, list: &str) -> Result<PrefixResolution, NamespaceError> {
        let mut resolution = PrefixResolution::default();
        if list.is_empty() {
            return Ok(resolution);
        }
        for prefix in list.split(',') {
            if !is_prefix_name(prefix) {
                return Err(NamespaceError::InvalidPrefix(prefix.to_string()));
            }
            match self.namespace(prefix) {
                Some(ns) => {
                    resolution.namespaces.insert(prefix.to_string(), ns.to_string());
                }
                None if !resolution.unknown.iter().any(|u| u == prefix) => resolution.unknown.push(prefix.to_string()),
                None => {}
            }
        }
        Ok(resolution)
    }
}
