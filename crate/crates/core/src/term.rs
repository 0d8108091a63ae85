//! RDF term model.
//!
//! Blank nodes are handled through their skolem form: the label `b1` is the
//! node `_:b1` in paths and ids, and the IRI `<_:b1>` when written into SPARQL.

use std::cmp::Ordering;
use std::fmt;

pub mod vocab {
    pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const RDF_LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
    pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
    pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
    pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
    pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
    pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
    pub const XSD_FLOAT: &str = "http://www.w3.org/2001/XMLSchema#float";
}

/// Prefix of skolem IRIs standing in for blank nodes.
pub const SKOLEM_PREFIX: &str = "_:";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Skolemized blank node, holding only its label.
    BNode(String),
    Iri(String),
    Literal(Literal),
}

impl Term {
    /// Builds an IRI term, mapping skolem IRIs (`_:label`) to [`Term::BNode`].
    pub fn iri(iri: impl Into<String>) -> Term {
        let iri = iri.into();
        match iri.strip_prefix(SKOLEM_PREFIX) {
            Some(label) if !label.is_empty() => Term::BNode(label.to_string()),
            _ => Term::Iri(iri),
        }
    }

    pub fn bnode(label: impl Into<String>) -> Term {
        Term::BNode(label.into())
    }

    pub fn literal(literal: Literal) -> Term {
        Term::Literal(literal)
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    /// The IRI this node is known by on the wire. Blank nodes use their
    /// skolem IRI; literals have none.
    pub fn wire_iri(&self) -> Option<String> {
        match self {
            Term::Iri(iri) => Some(iri.clone()),
            Term::BNode(label) => Some(format!("{SKOLEM_PREFIX}{label}")),
            Term::Literal(_) => None,
        }
    }

    /// SPARQL `str()` of the term.
    pub fn str_value(&self) -> String {
        match self {
            Term::Iri(iri) => iri.clone(),
            Term::BNode(label) => format!("{SKOLEM_PREFIX}{label}"),
            Term::Literal(l) => l.lexical.clone(),
        }
    }
}

impl fmt::Display for Term {
    /// N-Triples rendering.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{}>", escape_iri(iri)),
            Term::BNode(label) => write!(f, "_:{label}"),
            Term::Literal(l) => l.fmt(f),
        }
    }
}

/// A ground triple. Subjects are never literals, predicates are IRIs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Triple {
        Triple { subject, predicate, object }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub lexical: String,
    pub datatype: String,
    /// Present iff `datatype` is `rdf:langString`.
    pub language: Option<String>,
}

impl Literal {
    pub fn string(lexical: impl Into<String>) -> Literal {
        Literal {
            lexical: lexical.into(),
            datatype: vocab::XSD_STRING.to_string(),
            language: None,
        }
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Literal {
        Literal {
            lexical: lexical.into(),
            datatype: vocab::RDF_LANG_STRING.to_string(),
            language: Some(language.into()),
        }
    }

    /// A typed literal. A `rdf:langString` datatype without a tag is not
    /// representable, so it degrades to `xsd:string`.
    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Literal {
        let datatype = datatype.into();
        let datatype = if datatype == vocab::RDF_LANG_STRING {
            vocab::XSD_STRING.to_string()
        } else {
            datatype
        };
        Literal {
            lexical: lexical.into(),
            datatype,
            language: None,
        }
    }

    pub fn integer(value: i128) -> Literal {
        Literal::typed(value.to_string(), vocab::XSD_INTEGER)
    }

    pub fn decimal(lexical: impl Into<String>) -> Literal {
        Literal::typed(lexical, vocab::XSD_DECIMAL)
    }

    pub fn numeric(&self) -> Option<Numeric> {
        Numeric::parse(&self.lexical, &self.datatype)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", escape_string(&self.lexical))?;
        if let Some(lang) = &self.language {
            write!(f, "@{lang}")
        } else if self.datatype != vocab::XSD_STRING {
            write!(f, "^^<{}>", escape_iri(&self.datatype))
        } else {
            Ok(())
        }
    }
}

const INTEGER_TYPES: &[&str] = &[
    "integer",
    "int",
    "long",
    "short",
    "byte",
    "nonNegativeInteger",
    "nonPositiveInteger",
    "positiveInteger",
    "negativeInteger",
    "unsignedLong",
    "unsignedInt",
    "unsignedShort",
    "unsignedByte",
];

/// Value of a numeric literal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Numeric {
    Integer(i128),
    Decimal(f64),
    Double(f64),
}

impl Numeric {
    pub fn parse(lexical: &str, datatype: &str) -> Option<Numeric> {
        let local = datatype.strip_prefix(vocab::XSD)?;
        let lexical = lexical.trim();
        if INTEGER_TYPES.contains(&local) {
            let digits = lexical.strip_prefix(['+', '-']).unwrap_or(lexical);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            lexical.parse().ok().map(Numeric::Integer)
        } else if local == "decimal" {
            let body = lexical.strip_prefix(['+', '-']).unwrap_or(lexical);
            let valid = !body.is_empty()
                && body.bytes().filter(|b| *b == b'.').count() <= 1
                && body.bytes().all(|b| b.is_ascii_digit() || b == b'.')
                && body != ".";
            if !valid {
                return None;
            }
            lexical.parse().ok().map(Numeric::Decimal)
        } else if local == "double" || local == "float" {
            match lexical {
                "INF" => Some(Numeric::Double(f64::INFINITY)),
                "-INF" => Some(Numeric::Double(f64::NEG_INFINITY)),
                "NaN" => Some(Numeric::Double(f64::NAN)),
                _ => lexical.parse().ok().map(Numeric::Double),
            }
        } else {
            None
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Numeric::Integer(i) => i as f64,
            Numeric::Decimal(d) | Numeric::Double(d) => d,
        }
    }

    /// Numeric comparison; NaN sorts after every number.
    pub fn total_cmp(self, other: Numeric) -> Ordering {
        match (self, other) {
            (Numeric::Integer(a), Numeric::Integer(b)) => a.cmp(&b),
            (a, b) => a.as_f64().total_cmp(&b.as_f64()),
        }
    }
}

/// Renders a decimal with at most 15 significant digits, no exponent and no
/// trailing zeros.
pub fn format_decimal(value: f64) -> String {
    if !value.is_finite() {
        return if value.is_nan() {
            "NaN".into()
        } else if value > 0.0 {
            "INF".into()
        } else {
            "-INF".into()
        };
    }
    if value == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.14e}", value);
    let (mantissa, exponent) = sci.split_once('e').expect("scientific notation");
    let exponent: i32 = exponent.parse().expect("exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let point = exponent + 1;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-point) as usize));
        out.push_str(digits);
    } else if point as usize >= digits.len() {
        out.push_str(digits);
        out.extend(std::iter::repeat_n('0', point as usize - digits.len()));
    } else {
        out.push_str(&digits[..point as usize]);
        out.push('.');
        out.push_str(&digits[point as usize..]);
    }
    out
}

pub(crate) fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// Escapes the characters IRIREF forbids as `\uXXXX`.
pub(crate) fn escape_iri(iri: &str) -> String {
    let mut out = String::with_capacity(iri.len());
    for c in iri.chars() {
        if (c as u32) <= 0x20 || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') {
            out.push_str(&format!("\\u{:04X}", c as u32));
        } else {
            out.push(c);
        }
    }
    out
}
