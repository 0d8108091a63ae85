//! Deterministic SPARQL 1.1 text for query and update plans.
//!
//! PREFIX lines are sorted and limited to prefixes the body uses. Patterns
//! keep plan order, one per line.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::namespace::PrefixMap;
use crate::path::SortDirection;
use crate::query::{Filter, PatternTerm, Predicate, QueryPlan, TriplePattern};
use crate::term::{escape_iri, escape_string, vocab, Term, Triple};
use crate::update::UpdatePlan;

/// Whether `local` can follow `prefix:` verbatim. Conservative subset of
/// PN_LOCAL without escapes.
pub fn is_pn_local(local: &str) -> bool {
    let Some(first) = local.chars().next() else {
        return false;
    };
    (first.is_ascii_alphanumeric() || first == '_')
        && local.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !local.ends_with('.')
}

struct Writer<'a> {
    prefixes: &'a PrefixMap,
    used: BTreeSet<String>,
    body: String,
}

impl<'a> Writer<'a> {
    fn new(prefixes: &'a PrefixMap) -> Self {
        Writer { prefixes, used: BTreeSet::new(), body: String::new() }
    }

    fn iri(&mut self, iri: &str) -> String {
        if let Some((prefix, local)) = self.prefixes.split_iri(iri) {
            if is_pn_local(local) {
                self.used.insert(prefix.to_string());
                return format!("{prefix}:{local}");
            }
        }
        format!("<{}>", escape_iri(iri))
    }

    fn term(&mut self, term: &Term) -> String {
        match term {
            Term::Iri(iri) => self.iri(iri),
            Term::BNode(_) => format!("<{}>", escape_iri(&term.str_value())),
            Term::Literal(l) => {
                let mut out = format!("\"{}\"", escape_string(&l.lexical));
                if let Some(lang) = &l.language {
                    out.push('@');
                    out.push_str(lang);
                } else if l.datatype != vocab::XSD_STRING {
                    out.push_str("^^");
                    out.push_str(&self.iri(&l.datatype));
                }
                out
            }
        }
    }

    fn pattern_term(&mut self, t: &PatternTerm) -> String {
        match t {
            PatternTerm::Var(v) => v.to_string(),
            PatternTerm::Term(t) => self.term(t),
        }
    }

    fn predicate(&mut self, p: &Predicate) -> String {
        match p {
            Predicate::Var(v) => v.to_string(),
            Predicate::Iri(t) => self.term(t),
            Predicate::Path(path) => {
                let mut out = String::new();
                path.write_with(&mut out, &mut |t, out| out.push_str(&self.term(t)));
                out
            }
        }
    }

    fn pattern(&mut self, p: &TriplePattern) {
        let s = self.pattern_term(&p.subject);
        let pred = self.predicate(&p.predicate);
        let o = self.pattern_term(&p.object);
        let _ = writeln!(self.body, "  {s} {pred} {o} .");
    }

    fn triple(&mut self, t: &Triple) {
        let s = self.term(&t.subject);
        let p = self.term(&t.predicate);
        let o = self.term(&t.object);
        let _ = writeln!(self.body, "  {s} {p} {o} .");
    }

    fn finish(self) -> String {
        let mut out = String::new();
        for prefix in &self.used {
            let ns = self.prefixes.namespace(prefix).expect("used prefixes are declared");
            let _ = writeln!(out, "PREFIX {prefix}: <{}>", escape_iri(ns));
        }
        out.push_str(&self.body);
        out
    }
}

fn direction(d: SortDirection) -> &'static str {
    match d {
        SortDirection::Ascending => "ASC",
        SortDirection::Descending => "DESC",
    }
}

/// Serializes a query plan as `SELECT DISTINCT`.
pub fn serialize_sparql(plan: &QueryPlan, prefixes: &PrefixMap) -> String {
    assert!(!plan.patterns.is_empty(), "query plans have at least one pattern");
    let mut w = Writer::new(prefixes);
    let mut select: Vec<String> = plan.projection.iter().map(ToString::to_string).collect();
    if let Some(agg) = &plan.aggregate {
        let function = agg.function.name().to_uppercase();
        select.push(format!("({function}(DISTINCT {}) AS {})", agg.over, agg.alias));
        if let Some(count) = &agg.count_alias {
            select.push(format!("(COUNT(DISTINCT {}) AS {count})", agg.over));
        }
    }
    let _ = writeln!(w.body, "SELECT DISTINCT {}", select.join(" "));
    w.body.push_str("WHERE {\n");
    for p in &plan.patterns {
        w.pattern(p);
    }
    for f in &plan.filters {
        match f {
            Filter::Regex { var, pattern } => {
                let _ = writeln!(w.body, "  FILTER(regex(str({var}), \"{}\"))", escape_string(pattern));
            }
        }
    }
    w.body.push_str("}\n");
    if plan.aggregate.is_some() && !plan.projection.is_empty() {
        let group: Vec<String> = plan.projection.iter().map(ToString::to_string).collect();
        let _ = writeln!(w.body, "GROUP BY {}", group.join(" "));
    }
    if !plan.order.is_empty() {
        let keys: Vec<String> = plan.order.iter().map(|k| format!("{}({})", direction(k.direction), k.var)).collect();
        let _ = writeln!(w.body, "ORDER BY {}", keys.join(" "));
    }
    if let Some(slice) = plan.slice {
        let _ = writeln!(w.body, "LIMIT {}", slice.limit);
        if slice.offset > 0 {
            let _ = writeln!(w.body, "OFFSET {}", slice.offset);
        }
    }
    w.finish()
}

/// Serializes an update plan. Each variable-bearing delete pattern is its own
/// `DELETE WHERE` so that patterns never join; an empty plan yields "".
pub fn serialize_update(plan: &UpdatePlan, prefixes: &PrefixMap) -> String {
    if plan.is_empty() {
        return String::new();
    }
    let mut w = Writer::new(prefixes);
    let mut operations = 0;
    let mut separate = |w: &mut Writer| {
        if operations > 0 {
            w.body.push_str(";\n");
        }
        operations += 1;
    };
    let (ground, open): (Vec<_>, Vec<_>) = plan.deletes.iter().partition(|p| p.variables().is_empty());
    for p in open {
        separate(&mut w);
        w.body.push_str("DELETE WHERE {\n");
        w.pattern(p);
        w.body.push_str("}\n");
    }
    if !ground.is_empty() {
        separate(&mut w);
        w.body.push_str("DELETE DATA {\n");
        for p in ground {
            w.pattern(p);
        }
        w.body.push_str("}\n");
    }
    if !plan.inserts.is_empty() {
        separate(&mut w);
        w.body.push_str("INSERT DATA {\n");
        for t in &plan.inserts {
            w.triple(t);
        }
        w.body.push_str("}\n");
    }
    w.finish()
}
