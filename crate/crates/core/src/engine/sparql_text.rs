//! Reader for the SPARQL subset this crate writes: PREFIX declarations,
//! `SELECT DISTINCT` with optional aggregates, triple patterns with
//! property paths, regex filters, GROUP BY, ORDER BY, LIMIT and OFFSET;
//! updates made of `DELETE WHERE`, `DELETE DATA` and `INSERT DATA`.
//! Anything outside the subset is rejected.

use std::collections::HashMap;

use thiserror::Error;

use crate::path::{AggregateFn, PropertyPath, SortDirection};
use crate::query::{Aggregate, Filter, OrderKey, PatternTerm, Predicate, QueryPlan, Slice, TriplePattern, Variable};
use crate::term::{vocab, Literal, Term, Triple};
use crate::update::UpdatePlan;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("SPARQL syntax error: {0}")]
pub struct SparqlParseError(pub String);

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Iri(String),
    PName(String, String),
    Var(String),
    Str(String),
    Lang(String),
    DtMark,
    Int(u64),
    Word(String),
    Punct(char),
}

fn err<T>(msg: impl Into<String>) -> Result<T, SparqlParseError> {
    Err(SparqlParseError(msg.into()))
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.')
}

fn read_escape(chars: &mut std::iter::Peekable<std::str::Chars<'_>>) -> Result<char, SparqlParseError> {
    match chars.next() {
        Some(c @ ('u' | 'U')) => {
            let hex: String = chars.by_ref().take(if c == 'u' { 4 } else { 8 }).collect();
            u32::from_str_radix(&hex, 16)
                .ok()
                .and_then(char::from_u32)
                .map_or_else(|| err("bad unicode escape"), Ok)
        }
        Some('n') => Ok('\n'),
        Some('r') => Ok('\r'),
        Some('t') => Ok('\t'),
        Some('b') => Ok('\u{8}'),
        Some('f') => Ok('\u{c}'),
        Some(c @ ('"' | '\'' | '\\')) => Ok(c),
        _ => err("bad escape"),
    }
}

fn tokenize(text: &str) -> Result<Vec<Tok>, SparqlParseError> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        match c {
            '<' => {
                chars.next();
                let mut iri = String::new();
                loop {
                    match chars.next() {
                        Some('>') => break,
                        Some('\\') => iri.push(read_escape(&mut chars)?),
                        Some(c) => iri.push(c),
                        None => return err("unterminated IRI"),
                    }
                }
                toks.push(Tok::Iri(iri));
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some('\\') => s.push(read_escape(&mut chars)?),
                        Some(c) => s.push(c),
                        None => return err("unterminated string"),
                    }
                }
                toks.push(Tok::Str(s));
                if chars.peek() == Some(&'@') {
                    chars.next();
                    let mut lang = String::new();
                    while let Some(&c) = chars.peek().filter(|c| c.is_ascii_alphanumeric() || **c == '-') {
                        lang.push(c);
                        chars.next();
                    }
                    toks.push(Tok::Lang(lang));
                }
            }
            '?' => {
                chars.next();
                let mut name = String::new();
                while let Some(&c) = chars.peek().filter(|c| c.is_alphanumeric() || **c == '_') {
                    name.push(c);
                    chars.next();
                }
                toks.push(if name.is_empty() { Tok::Punct('?') } else { Tok::Var(name) });
            }
            '^' => {
                chars.next();
                if chars.peek() == Some(&'^') {
                    chars.next();
                    toks.push(Tok::DtMark);
                } else {
                    toks.push(Tok::Punct('^'));
                }
            }
            '{' | '}' | '(' | ')' | '.' | ';' | '|' | '/' | '*' | '+' | ',' => {
                chars.next();
                toks.push(Tok::Punct(c));
            }
            c if is_word_char(c) || c == ':' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek().filter(|c| is_word_char(**c) || **c == ':') {
                    word.push(c);
                    chars.next();
                }
                let mut trailing_dots = 0;
                while word.ends_with('.') {
                    word.pop();
                    trailing_dots += 1;
                }
                if let Some((prefix, local)) = word.split_once(':') {
                    toks.push(Tok::PName(prefix.to_string(), local.to_string()));
                } else if let Ok(n) = word.parse::<u64>() {
                    toks.push(Tok::Int(n));
                } else {
                    toks.push(Tok::Word(word));
                }
                toks.extend(std::iter::repeat_n(Tok::Punct('.'), trailing_dots));
            }
            other => return err(format!("unexpected character {other:?}")),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    prefixes: HashMap<String, String>,
}

impl Parser {
    fn new(text: &str) -> Result<Parser, SparqlParseError> {
        let mut p = Parser { toks: tokenize(text)?, pos: 0, prefixes: HashMap::new() };
        while p.keyword("PREFIX") {
            let Some(Tok::PName(prefix, local)) = p.next() else {
                return err("expected prefix name");
            };
            if !local.is_empty() {
                return err("prefix declaration with a local part");
            }
            let Some(Tok::Iri(ns)) = p.next() else {
                return err("expected namespace IRI");
            };
            p.prefixes.insert(prefix, ns);
        }
        Ok(p)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn keyword(&mut self, kw: &str) -> bool {
        match self.peek() {
            Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw) => {
                self.pos += 1;
                true
            }
            _ => false,
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), SparqlParseError> {
        if self.keyword(kw) {
            Ok(())
        } else {
            err(format!("expected {kw}, found {:?}", self.peek()))
        }
    }

    fn punct(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<(), SparqlParseError> {
        if self.punct(c) {
            Ok(())
        } else {
            err(format!("expected `{c}`, found {:?}", self.peek()))
        }
    }

    fn var(&mut self) -> Result<Variable, SparqlParseError> {
        match self.next() {
            Some(Tok::Var(v)) => Ok(Variable::new(v)),
            other => err(format!("expected a variable, found {other:?}")),
        }
    }

    fn int(&mut self) -> Result<u64, SparqlParseError> {
        match self.next() {
            Some(Tok::Int(n)) => Ok(n),
            other => err(format!("expected an integer, found {other:?}")),
        }
    }

    fn iri_of(&self, tok: Tok) -> Result<Term, SparqlParseError> {
        match tok {
            Tok::Iri(iri) => Ok(Term::iri(iri)),
            Tok::PName(prefix, local) => match self.prefixes.get(&prefix) {
                Some(ns) => Ok(Term::iri(format!("{ns}{local}"))),
                None => err(format!("undeclared prefix `{prefix}`")),
            },
            Tok::Word(w) if w == "a" => Ok(Term::Iri(vocab::RDF_TYPE.into())),
            other => err(format!("expected an IRI, found {other:?}")),
        }
    }

    fn term(&mut self) -> Result<Term, SparqlParseError> {
        match self.next() {
            Some(Tok::Str(lexical)) => match self.peek() {
                Some(Tok::Lang(_)) => {
                    let Some(Tok::Lang(lang)) = self.next() else { unreachable!() };
                    Ok(Term::Literal(Literal::lang(lexical, lang)))
                }
                Some(Tok::DtMark) => {
                    self.pos += 1;
                    let dt = self.next().ok_or_else(|| SparqlParseError("missing datatype".into()))?;
                    match self.iri_of(dt)? {
                        Term::Iri(dt) => Ok(Term::Literal(Literal::typed(lexical, dt))),
                        _ => err("datatype must be an IRI"),
                    }
                }
                _ => Ok(Term::Literal(Literal::string(lexical))),
            },
            Some(tok) => self.iri_of(tok),
            None => err("unexpected end of input"),
        }
    }

    fn node(&mut self) -> Result<PatternTerm, SparqlParseError> {
        if let Some(Tok::Var(_)) = self.peek() {
            return Ok(PatternTerm::Var(self.var()?));
        }
        Ok(PatternTerm::Term(self.term()?))
    }

    fn path_alt(&mut self) -> Result<PropertyPath<Term>, SparqlParseError> {
        let mut items = vec![self.path_seq()?];
        while self.punct('|') {
            items.push(self.path_seq()?);
        }
        Ok(if items.len() == 1 { items.pop().expect("one item") } else { PropertyPath::Alternative(items) })
    }

    fn path_seq(&mut self) -> Result<PropertyPath<Term>, SparqlParseError> {
        let mut items = vec![self.path_elt_or_inverse()?];
        while self.punct('/') {
            items.push(self.path_elt_or_inverse()?);
        }
        Ok(if items.len() == 1 { items.pop().expect("one item") } else { PropertyPath::Sequence(items) })
    }

    fn path_elt_or_inverse(&mut self) -> Result<PropertyPath<Term>, SparqlParseError> {
        if self.punct('^') {
            return Ok(PropertyPath::Inverse(Box::new(self.path_elt()?)));
        }
        self.path_elt()
    }

    fn path_elt(&mut self) -> Result<PropertyPath<Term>, SparqlParseError> {
        let primary = if self.punct('(') {
            let inner = self.path_alt()?;
            self.expect_punct(')')?;
            inner
        } else {
            let tok = self.next().ok_or_else(|| SparqlParseError("unexpected end of path".into()))?;
            PropertyPath::Link(self.iri_of(tok)?)
        };
        Ok(if self.punct('*') {
            PropertyPath::ZeroOrMore(Box::new(primary))
        } else if self.punct('+') {
            PropertyPath::OneOrMore(Box::new(primary))
        } else if self.punct('?') {
            PropertyPath::ZeroOrOne(Box::new(primary))
        } else {
            primary
        })
    }

    fn predicate(&mut self) -> Result<Predicate, SparqlParseError> {
        if let Some(Tok::Var(_)) = self.peek() {
            return Ok(Predicate::Var(self.var()?));
        }
        Ok(match self.path_alt()? {
            PropertyPath::Link(t) => Predicate::Iri(t),
            path => Predicate::Path(path),
        })
    }

    fn triple_pattern(&mut self) -> Result<TriplePattern, SparqlParseError> {
        let subject = self.node()?;
        let predicate = self.predicate()?;
        let object = self.node()?;
        self.expect_punct('.')?;
        Ok(TriplePattern { subject, predicate, object })
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn aggregate_fn(&mut self) -> Result<AggregateFn, SparqlParseError> {
        for (kw, f) in [("COUNT", AggregateFn::Count), ("SUM", AggregateFn::Sum), ("AVG", AggregateFn::Avg)] {
            if self.keyword(kw) {
                return Ok(f);
            }
        }
        err(format!("expected COUNT, SUM or AVG, found {:?}", self.peek()))
    }
}

/// Parses query text produced by [`crate::sparql::serialize_sparql`].
pub fn parse_query(text: &str) -> Result<QueryPlan, SparqlParseError> {
    let mut p = Parser::new(text)?;
    p.expect_keyword("SELECT")?;
    p.expect_keyword("DISTINCT")?;
    let mut projection = Vec::new();
    let mut aggregates: Vec<(AggregateFn, Variable, Variable)> = Vec::new();
    loop {
        if let Some(Tok::Var(_)) = p.peek() {
            if !aggregates.is_empty() {
                return err("plain variables must precede aggregates");
            }
            projection.push(p.var()?);
        } else if p.punct('(') {
            let function = p.aggregate_fn()?;
            p.expect_punct('(')?;
            p.expect_keyword("DISTINCT")?;
            let over = p.var()?;
            p.expect_punct(')')?;
            p.expect_keyword("AS")?;
            let alias = p.var()?;
            p.expect_punct(')')?;
            aggregates.push((function, over, alias));
        } else {
            break;
        }
    }
    let aggregate = match aggregates.as_slice() {
        [] => None,
        [(function, over, alias)] => Some(Aggregate { function: *function, over: over.clone(), alias: alias.clone(), count_alias: None }),
        [(AggregateFn::Avg, over, alias), (AggregateFn::Count, counted, count_alias)] if over == counted => Some(Aggregate {
            function: AggregateFn::Avg,
            over: over.clone(),
            alias: alias.clone(),
            count_alias: Some(count_alias.clone()),
        }),
        _ => return err("unsupported aggregate combination"),
    };
    if projection.is_empty() && aggregate.is_none() {
        return err("empty projection");
    }
    p.expect_keyword("WHERE")?;
    p.expect_punct('{')?;
    let mut patterns = Vec::new();
    let mut filters = Vec::new();
    while !p.punct('}') {
        if p.keyword("FILTER") {
            p.expect_punct('(')?;
            p.expect_keyword("regex")?;
            p.expect_punct('(')?;
            p.expect_keyword("str")?;
            p.expect_punct('(')?;
            let var = p.var()?;
            p.expect_punct(')')?;
            p.expect_punct(',')?;
            let Some(Tok::Str(pattern)) = p.next() else {
                return err("expected a regex string");
            };
            p.expect_punct(')')?;
            p.expect_punct(')')?;
            filters.push(Filter::Regex { var, pattern });
        } else if p.at_end() {
            return err("unterminated group");
        } else {
            patterns.push(p.triple_pattern()?);
        }
    }
    if patterns.is_empty() {
        return err("empty graph pattern");
    }
    if p.keyword("GROUP") {
        p.expect_keyword("BY")?;
        let mut group = Vec::new();
        while let Some(Tok::Var(_)) = p.peek() {
            group.push(p.var()?);
        }
        if aggregate.is_none() || group != projection {
            return err("GROUP BY must list exactly the projected variables of an aggregate query");
        }
    } else if aggregate.is_some() && !projection.is_empty() {
        return err("aggregate with plain variables needs GROUP BY");
    }
    let mut order = Vec::new();
    if p.keyword("ORDER") {
        p.expect_keyword("BY")?;
        loop {
            let direction = if p.keyword("ASC") {
                SortDirection::Ascending
            } else if p.keyword("DESC") {
                SortDirection::Descending
            } else {
                break;
            };
            p.expect_punct('(')?;
            let var = p.var()?;
            p.expect_punct(')')?;
            order.push(OrderKey { var, direction });
        }
        if order.is_empty() {
            return err("empty ORDER BY");
        }
    }
    let mut slice = None;
    if p.keyword("LIMIT") {
        slice = Some(Slice { limit: p.int()?, offset: 0 });
    }
    if p.keyword("OFFSET") {
        let offset = p.int()?;
        slice = Some(Slice { limit: slice.map_or(u64::MAX, |s| s.limit), offset });
    }
    if !p.at_end() {
        return err(format!("unexpected {:?}", p.peek()));
    }
    Ok(QueryPlan { patterns, filters, projection, aggregate, order, slice })
}

/// Parses update text produced by [`crate::sparql::serialize_update`].
pub fn parse_update(text: &str) -> Result<UpdatePlan, SparqlParseError> {
    let mut p = Parser::new(text)?;
    let mut plan = UpdatePlan::default();
    while !p.at_end() {
        let (delete, data) = if p.keyword("DELETE") {
            if p.keyword("WHERE") {
                (true, false)
            } else {
                p.expect_keyword("DATA")?;
                (true, true)
            }
        } else if p.keyword("INSERT") {
            p.expect_keyword("DATA")?;
            (false, true)
        } else {
            return err(format!("expected DELETE or INSERT, found {:?}", p.peek()));
        };
        p.expect_punct('{')?;
        while !p.punct('}') {
            if p.at_end() {
                return err("unterminated block");
            }
            let pattern = p.triple_pattern()?;
            if matches!(pattern.predicate, Predicate::Path(_)) {
                return err("property paths are not allowed in updates");
            }
            if data && !pattern.variables().is_empty() {
                return err("DATA blocks must be ground");
            }
            if delete {
                plan.deletes.push(pattern);
            } else {
                plan.inserts.push(ground(pattern)?);
            }
        }
        if !p.punct(';') && !p.at_end() {
            return err(format!("expected `;`, found {:?}", p.peek()));
        }
    }
    Ok(plan)
}

fn ground(pattern: TriplePattern) -> Result<Triple, SparqlParseError> {
    match (pattern.subject, pattern.predicate, pattern.object) {
        (PatternTerm::Term(s), Predicate::Iri(p), PatternTerm::Term(o)) if !s.is_literal() && !p.is_literal() => {
            Ok(Triple::new(s, p, o))
        }
        _ => err("invalid ground triple"),
    }
}
