#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use sparql_rest::engine::TripleStore;
use sparql_rest::path::PropertyPath;
use sparql_rest::query::{Filter, PatternTerm, Predicate, QueryPlan, TriplePattern, Variable};
use sparql_rest::term::vocab;
use sparql_rest::{Literal, PrefixMap, Term, Triple};

pub const EX: &str = "http://example.org/";

pub fn ex(local: &str) -> Term {
    Term::iri(format!("{EX}{local}"))
}

pub fn prefixes() -> PrefixMap {
    PrefixMap::with_defaults()
}

pub fn node(i: usize) -> Term {
    if i == 5 {
        Term::bnode("b5")
    } else {
        ex(&format!("n{i}"))
    }
}

pub fn predicate(i: usize) -> Term {
    match i {
        0 => ex("p"),
        1 => ex("q"),
        _ => Term::iri(vocab::RDF_TYPE),
    }
}

fn object() -> impl Strategy<Value = Term> {
    prop_oneof![
        4 => (0usize..6).prop_map(node),
        1 => prop::sample::select(vec!["C", "D"]).prop_map(ex),
        1 => prop::sample::select(vec!["a", "ab", "b"]).prop_map(|s| Term::Literal(Literal::string(s))),
        1 => prop::sample::select(vec!["a", "b"]).prop_map(|s| Term::Literal(Literal::lang(s, "en"))),
        1 => (-3i128..20).prop_map(|i| Term::Literal(Literal::integer(i))),
        1 => prop::sample::select(vec!["1.5", "-0.25"]).prop_map(|s| Term::Literal(Literal::decimal(s))),
    ]
}

/// Up to 30 triples over a six-node vocabulary with rdf:type edges to
/// `ex:C`/`ex:D`.
pub fn graph() -> impl Strategy<Value = Vec<Triple>> {
    prop::collection::vec(
        (0usize..6, 0usize..3, object(), prop::sample::select(vec!["C", "D"])).prop_map(|(s, p, o, class)| {
            let object = if p == 2 { ex(class) } else { o };
            Triple::new(node(s), predicate(p), object)
        }),
        0..30,
    )
    .prop_map(|ts| ts.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
}

pub fn res_token() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => (0usize..6).prop_map(|i| if i == 5 { "_:b5".to_string() } else { format!("ex:n{i}") }),
        2 => Just("*".to_string()),
        1 => Just("%22a%22".to_string()),
        1 => Just("a@en".to_string()),
        1 => Just("1.5^^xsd:decimal".to_string()),
    ]
}

pub fn prop_token() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "ex:p", "ex:q", "rdf:type", "*", "*", "(ex:p|ex:q)", "(^ex:p)", "(ex:p/ex:q)", "(ex:p+)", "(ex:p*)", "(ex:q%3F)",
        "((ex:p|^ex:q)*)",
    ])
    .prop_map(str::to_string)
}

pub fn rql_token() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "", "", "", "?regex(a)", "?regex(n%5B13%5D)", "?count()", "?sum()", "?avg()", "?sort(-)", "?limit(2)",
        "?limit(1,1)", "?sort(+ex:p)",
    ])
    .prop_map(str::to_string)
}

/// Random GET targets over the same vocabulary as [`graph`].
pub fn target() -> impl Strategy<Value = String> {
    let entry = prop::sample::select(vec!["/api/resource", "/api/class/ex:C", "/api/class/*"]);
    (entry, prop::collection::vec((res_token(), prop_token()), 0..3), prop::option::of(res_token()), rql_token()).prop_map(
        |(entry, pairs, last, rql)| {
            let mut out = entry.to_string();
            for (r, p) in pairs {
                out.push_str(&format!("/{r}/{p}"));
            }
            if let Some(r) = last {
                out.push_str(&format!("/{r}"));
            }
            out + &rql
        },
    )
}

// ---- naive evaluation -------------------------------------------------------

pub type Binding = BTreeMap<Variable, Term>;
type Rel = BTreeSet<(Term, Term)>;

fn universe(graph: &[Triple], plan: &QueryPlan) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    for t in graph {
        out.insert(t.subject.clone());
        out.insert(t.object.clone());
    }
    for p in &plan.patterns {
        for end in [&p.subject, &p.object] {
            if let PatternTerm::Term(t) = end {
                out.insert(t.clone());
            }
        }
    }
    out
}

fn compose(a: &Rel, b: &Rel) -> Rel {
    a.iter()
        .flat_map(|(x, y)| b.iter().filter(move |(y2, _)| y2 == y).map(move |(_, z)| (x.clone(), z.clone())))
        .collect()
}

fn plus(base: &Rel) -> Rel {
    let mut out = base.clone();
    loop {
        let next: Rel = out.union(&compose(&out, base)).cloned().collect();
        if next.len() == out.len() {
            return out;
        }
        out = next;
    }
}

/// The pairs a property path relates, with zero-length steps over `nodes`.
pub fn relation(path: &PropertyPath<Term>, graph: &[Triple], nodes: &BTreeSet<Term>) -> Rel {
    let identity = || nodes.iter().map(|n| (n.clone(), n.clone())).collect::<Rel>();
    match path {
        PropertyPath::Link(p) => graph
            .iter()
            .filter(|t| &t.predicate == p)
            .map(|t| (t.subject.clone(), t.object.clone()))
            .collect(),
        PropertyPath::Inverse(inner) => relation(inner, graph, nodes).into_iter().map(|(a, b)| (b, a)).collect(),
        PropertyPath::Sequence(items) => {
            let mut rel = relation(&items[0], graph, nodes);
            for item in &items[1..] {
                rel = compose(&rel, &relation(item, graph, nodes));
            }
            rel
        }
        PropertyPath::Alternative(items) => items.iter().flat_map(|i| relation(i, graph, nodes)).collect(),
        PropertyPath::OneOrMore(inner) => plus(&relation(inner, graph, nodes)),
        PropertyPath::ZeroOrMore(inner) => plus(&relation(inner, graph, nodes)).union(&identity()).cloned().collect(),
        PropertyPath::ZeroOrOne(inner) => relation(inner, graph, nodes).union(&identity()).cloned().collect(),
    }
}

fn unify(binding: &mut Binding, end: &PatternTerm, value: &Term) -> bool {
    match end {
        PatternTerm::Term(t) => t == value,
        PatternTerm::Var(v) => match binding.get(v) {
            Some(bound) => bound == value,
            None => {
                binding.insert(v.clone(), value.clone());
                true
            }
        },
    }
}

/// Every triple-shaped candidate for a pattern, as (subject, predicate?, object).
fn candidates(pattern: &TriplePattern, graph: &[Triple], nodes: &BTreeSet<Term>) -> Vec<(Term, Option<Term>, Term)> {
    match &pattern.predicate {
        Predicate::Iri(p) => graph
            .iter()
            .filter(|t| &t.predicate == p)
            .map(|t| (t.subject.clone(), None, t.object.clone()))
            .collect(),
        Predicate::Var(_) => graph.iter().map(|t| (t.subject.clone(), Some(t.predicate.clone()), t.object.clone())).collect(),
        Predicate::Path(path) => relation(path, graph, nodes).into_iter().map(|(s, o)| (s, None, o)).collect(),
    }
}

/// Cross product of every pattern's candidates, filtered by consistency.
pub fn naive_solutions(graph: &[Triple], plan: &QueryPlan) -> Vec<Binding> {
    let nodes = universe(graph, plan);
    let mut solutions = vec![Binding::new()];
    for pattern in &plan.patterns {
        let cands = candidates(pattern, graph, &nodes);
        let mut next = Vec::new();
        for binding in &solutions {
            for (s, p, o) in &cands {
                let mut b = binding.clone();
                let ok = unify(&mut b, &pattern.subject, s)
                    && match (&pattern.predicate, p) {
                        (Predicate::Var(v), Some(p)) => unify(&mut b, &PatternTerm::Var(v.clone()), p),
                        _ => true,
                    }
                    && unify(&mut b, &pattern.object, o);
                if ok {
                    next.push(b);
                }
            }
        }
        solutions = next;
    }
    for filter in &plan.filters {
        let Filter::Regex { var, pattern } = filter;
        let re = regex::Regex::new(pattern).unwrap();
        solutions.retain(|b| b.get(var).is_some_and(|t| re.is_match(&t.str_value())));
    }
    solutions
}

pub type Row = Vec<Option<Term>>;

pub fn naive_projection(graph: &[Triple], plan: &QueryPlan) -> BTreeSet<Row> {
    naive_solutions(graph, plan)
        .iter()
        .map(|b| plan.projection.iter().map(|v| b.get(v).cloned()).collect())
        .collect()
}

pub fn eval_rows(graph: &[Triple], plan: &QueryPlan) -> Vec<Row> {
    TripleStore::from_triples(graph.iter().cloned()).eval(plan).rows
}

/// Numeric value of a literal per its XSD datatype, independent of the
/// engine's numeric model.
pub fn number(term: &Term) -> Option<f64> {
    let Term::Literal(l) = term else { return None };
    let numeric = [vocab::XSD_INTEGER, vocab::XSD_DECIMAL, "http://www.w3.org/2001/XMLSchema#double"];
    if !numeric.contains(&l.datatype.as_str()) && !l.datatype.starts_with("http://www.w3.org/2001/XMLSchema#nonNegative") {
        return None;
    }
    l.lexical.parse().ok()
}
