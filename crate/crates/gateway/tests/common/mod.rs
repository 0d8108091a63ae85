#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, RwLock};

use rand::seq::IndexedRandom;
use rand::Rng;
use serde_json::{json, Map, Value};
use sparql_rest::engine::TripleStore;
use sparql_rest::path::{encode_id, encode_token, AggregateFn, ClassRef, EntryPoint, PropRef, PropertyPath, ResRef, RqlOp, Segment};
use sparql_rest::query::CompileOptions;
use sparql_rest::term::{vocab, Numeric};
use sparql_rest::{ApiPath, IdToken, Literal, PrefixMap, Term, Triple};
use sparql_rest_gateway::{Embedded, Gateway, IdMinter};

pub const DBPEDIA: &str = include_str!("../data/dbpedia_excerpt.nt");
pub const SHARED_LITERAL: &str = include_str!("../data/shared_literal.nt");
pub const CORPUS: &str = include_str!("../data/corpus.txt");
pub const BASE: &str = "http://example.org/";

pub fn goldens_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/goldens")
}

pub fn block_on<T>(f: impl std::future::Future<Output = T>) -> T {
    tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap().block_on(f)
}

pub fn store_from(ntriples: &str) -> TripleStore {
    let mut store = TripleStore::new();
    store.load_ntriples(ntriples).unwrap();
    store
}

pub fn embedded(store: TripleStore, seed: u64) -> (Gateway, Arc<RwLock<TripleStore>>) {
    let endpoint = Embedded::new(store);
    let shared = endpoint.store();
    let gateway = Gateway::new(
        PrefixMap::with_defaults(),
        Arc::new(endpoint),
        IdMinter::seeded(BASE, seed),
        CompileOptions::default(),
    );
    (gateway, shared)
}

pub fn snapshot(store: &Arc<RwLock<TripleStore>>) -> Vec<Triple> {
    store.read().unwrap().triples()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub method: String,
    pub target: String,
    pub body: Option<Value>,
}

impl Request {
    pub fn new(method: &str, target: impl Into<String>, body: Option<Value>) -> Request {
        Request { method: method.into(), target: target.into(), body }
    }

    pub fn line(&self) -> String {
        match &self.body {
            Some(body) => format!("{} {}\t{body}", self.method, self.target),
            None => format!("{} {}", self.method, self.target),
        }
    }
}

pub fn corpus() -> Vec<Request> {
    CORPUS
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|line| {
            let (head, body) = match line.split_once('\t') {
                Some((head, body)) => (head, Some(serde_json::from_str(body).expect("corpus bodies are JSON"))),
                None => (line, None),
            };
            let (method, target) = head.split_once(' ').expect("METHOD target");
            Request::new(method, target, body)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Random graphs over the corpus vocabulary.

pub const NODES: &[&str] = &["dbr:Germany", "dbr:France", "dbr:Italy", "dbr:Berlin", "dbr:Paris", "dbr:Rome", "dbr:Spain"];
pub const CLASSES: &[&str] = &["dbo:Country", "dbo:City"];
pub const LINKS: &[&str] = &["dbo:capital", "dbo:country"];
pub const LABELS: &[&str] = &["rdfs:label", "skos:prefLabel"];
pub const NUMBERS: &[&str] = &["dbo:populationTotal"];

pub fn expand(token: &str) -> Term {
    PrefixMap::with_defaults().expand(token).unwrap()
}

fn random_label(rng: &mut impl Rng) -> Literal {
    let lexical = *["Berlin", "Deutschland", "Roma", "land", "Paris"].choose(rng).unwrap();
    match rng.random_range(0..3) {
        0 => Literal::string(lexical),
        1 => Literal::lang(lexical, "en"),
        _ => Literal::lang(lexical, "de"),
    }
}

fn random_number(rng: &mut impl Rng) -> Literal {
    match rng.random_range(0..4) {
        0 => Literal::decimal(format!("{}.5", rng.random_range(0..10))),
        1 => Literal::string("n/a"),
        _ => Literal::integer(rng.random_range(-5..40)),
    }
}

/// Up to `size` distinct triples.
pub fn random_graph(rng: &mut impl Rng, size: usize) -> Vec<Triple> {
    let mut triples = BTreeSet::new();
    for _ in 0..size {
        let subject = expand(NODES.choose(rng).unwrap());
        let (predicate, object) = match rng.random_range(0..10) {
            0..=1 => (Term::iri(vocab::RDF_TYPE), expand(CLASSES.choose(rng).unwrap())),
            2..=5 => (expand(LINKS.choose(rng).unwrap()), expand(NODES.choose(rng).unwrap())),
            6..=7 => (expand(LABELS.choose(rng).unwrap()), Term::Literal(random_label(rng))),
            _ => (expand(NUMBERS.choose(rng).unwrap()), Term::Literal(random_number(rng))),
        };
        triples.insert(Triple::new(subject, predicate, object));
    }
    triples.into_iter().collect()
}

pub fn random_store(rng: &mut impl Rng, size: usize) -> TripleStore {
    TripleStore::from_triples(random_graph(rng, size))
}

pub fn res_token(term: &Term, prefixes: &PrefixMap) -> String {
    match term {
        Term::Literal(l) => encode_token(&match &l.language {
            Some(lang) => format!("\"{}\"@{lang}", l.lexical),
            None if l.datatype == vocab::XSD_STRING => format!("\"{}\"", l.lexical),
            None => format!("\"{}\"^^{}", l.lexical, prefixes.compact_iri(&l.datatype)),
        }),
        other => encode_id(&IdToken::parse(&prefixes.compact(other)).unwrap()),
    }
}

fn random_prop(rng: &mut impl Rng, predicate: &str) -> String {
    let other = *[LINKS, LABELS].concat().choose(rng).unwrap();
    match rng.random_range(0..8) {
        0 => format!("(^{predicate})"),
        1 => format!("({predicate}|{other})"),
        2 => format!("({predicate}/{other})"),
        3 => format!("({predicate}+)"),
        4 => format!("(({predicate})*)"),
        5 => format!("(^{other}|{predicate})"),
        _ => predicate.to_string(),
    }
}

/// A path that mostly follows real edges of `graph`, with some segments
/// replaced by wildcards or property-path expressions. At most 5 segments.
pub fn random_path(rng: &mut impl Rng, graph: &[Triple]) -> String {
    let prefixes = PrefixMap::with_defaults();
    let rdf_type = Term::iri(vocab::RDF_TYPE);
    let mut current = expand(NODES.choose(rng).unwrap());
    let mut out = String::from("/api");
    if rng.random_bool(0.3) {
        let class = if rng.random_bool(0.3) { "*".to_string() } else { CLASSES.choose(rng).unwrap().to_string() };
        let instances: Vec<&Triple> =
            graph.iter().filter(|t| t.predicate == rdf_type && (class == "*" || t.object == expand(&class))).collect();
        if let Some(t) = instances.choose(rng) {
            current = t.subject.clone();
        }
        out.push_str(&format!("/class/{class}"));
    } else {
        out.push_str("/resource");
    }
    let length = rng.random_range(0..=5);
    for position in 0..length {
        let wild = rng.random_bool(0.35);
        if position % 2 == 0 {
            let token = if wild { "*".to_string() } else { res_token(&current, &prefixes) };
            out.push('/');
            out.push_str(&token);
        } else {
            let edges: Vec<&Triple> = graph.iter().filter(|t| t.subject == current).collect();
            let (predicate, next) = match edges.choose(rng) {
                Some(t) => (prefixes.compact(&t.predicate), t.object.clone()),
                None => ([LINKS, LABELS].concat().choose(rng).unwrap().to_string(), expand(NODES.choose(rng).unwrap())),
            };
            let token = if wild { "*".to_string() } else { random_prop(rng, &predicate) };
            out.push('/');
            out.push_str(&token);
            current = next;
        }
    }
    out
}

/// `*` segments that are not the last segment; a class wildcard always counts.
pub fn nonterminal_wildcards(path: &ApiPath) -> usize {
    let class = matches!(path.entry, EntryPoint::Class(ClassRef::Wildcard)) as usize;
    let n = path.segments.len();
    class
        + path.segments[..n.saturating_sub(1)]
            .iter()
            .filter(|s| matches!(s, Segment::Res(ResRef::Wildcard) | Segment::Prop(PropRef::Wildcard)))
            .count()
}

/// Map layers along the first branch, not counting the property map of an
/// object view.
pub fn nesting_depth(node: &Value, path: &ApiPath) -> usize {
    let ends_at_object_view = matches!(path.segments.last(), Some(Segment::Res(ResRef::Id(_) | ResRef::Literal(_))));
    sparql_rest::shape::map_depth(node) - ends_at_object_view as usize
}

// ---------------------------------------------------------------------------
// Brute-force oracle: enumerates walks over the triple list directly.

type Rel = BTreeSet<(Term, Term)>;

fn nodes(graph: &[Triple]) -> BTreeSet<Term> {
    graph.iter().flat_map(|t| [t.subject.clone(), t.object.clone()]).collect()
}

fn compose(a: &Rel, b: &Rel) -> Rel {
    let mut out = Rel::new();
    for (x, m) in a {
        for (m2, y) in b {
            if m == m2 {
                out.insert((x.clone(), y.clone()));
            }
        }
    }
    out
}

fn closure(base: &Rel) -> Rel {
    let mut all = base.clone();
    loop {
        let next: Rel = all.union(&compose(&all, base)).cloned().collect();
        if next.len() == all.len() {
            return all;
        }
        all = next;
    }
}

fn relation(path: &PropertyPath<Term>, graph: &[Triple], universe: &BTreeSet<Term>) -> Rel {
    let identity = || universe.iter().map(|t| (t.clone(), t.clone())).collect::<Rel>();
    match path {
        PropertyPath::Link(p) => graph.iter().filter(|t| &t.predicate == p).map(|t| (t.subject.clone(), t.object.clone())).collect(),
        PropertyPath::Inverse(inner) => relation(inner, graph, universe).into_iter().map(|(a, b)| (b, a)).collect(),
        PropertyPath::Alternative(items) => items.iter().flat_map(|p| relation(p, graph, universe)).collect(),
        PropertyPath::Sequence(items) => {
            let mut rels = items.iter().map(|p| relation(p, graph, universe));
            let first = rels.next().unwrap_or_default();
            rels.fold(first, |acc, r| compose(&acc, &r))
        }
        PropertyPath::OneOrMore(inner) => closure(&relation(inner, graph, universe)),
        PropertyPath::ZeroOrMore(inner) => closure(&relation(inner, graph, universe)).union(&identity()).cloned().collect(),
        PropertyPath::ZeroOrOne(inner) => relation(inner, graph, universe).union(&identity()).cloned().collect(),
    }
}

fn literal_term(token: &sparql_rest::path::LiteralToken, prefixes: &PrefixMap) -> Term {
    Term::Literal(match (&token.language, &token.datatype) {
        (Some(lang), _) => Literal::lang(token.lexical.clone(), lang.clone()),
        (None, Some(dt)) => Literal::typed(token.lexical.clone(), prefixes.expand_token(dt).unwrap().str_value()),
        (None, None) => Literal::string(token.lexical.clone()),
    })
}

fn fixed_res(res: &ResRef, prefixes: &PrefixMap) -> Option<Term> {
    match res {
        ResRef::Id(id) => Some(prefixes.expand_token(id).unwrap()),
        ResRef::Literal(l) => Some(literal_term(l, prefixes)),
        ResRef::Wildcard => None,
    }
}

/// One way of walking the path: level keys in order plus the terminal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Walk {
    levels: Vec<Term>,
    terminal: Vec<Term>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Set,
    View,
}

fn value_object(l: &Literal, prefixes: &PrefixMap) -> Value {
    let mut obj = Map::new();
    obj.insert("value".into(), l.lexical.clone().into());
    if let Some(lang) = &l.language {
        obj.insert("language".into(), lang.clone().into());
    }
    obj.insert("datatype".into(), prefixes.compact_iri(&l.datatype).into());
    Value::Object(obj)
}

fn set_node(terms: &BTreeSet<Term>, prefixes: &PrefixMap) -> Value {
    let ids: BTreeSet<String> = terms.iter().filter(|t| !t.is_literal()).map(|t| prefixes.compact(t)).collect();
    let mut literals: Vec<&Literal> = terms.iter().filter_map(Term::as_literal).collect();
    literals.sort_by(|a, b| (&a.lexical, &a.datatype, &a.language).cmp(&(&b.lexical, &b.datatype, &b.language)));
    let mut node = Map::new();
    if !ids.is_empty() || literals.is_empty() {
        node.insert("ids".into(), json!(ids));
    }
    if !literals.is_empty() {
        node.insert("values".into(), literals.iter().map(|l| value_object(l, prefixes)).collect());
    }
    Value::Object(node)
}

fn aggregate_value(function: AggregateFn, terms: &BTreeSet<Term>, prefixes: &PrefixMap) -> Value {
    let decimal = |s: String| json!({ "values": [value_object(&Literal::decimal(s), prefixes)] });
    if function == AggregateFn::Count {
        return json!({ "values": [value_object(&Literal::integer(terms.len() as i128), prefixes)] });
    }
    let numbers: Option<Vec<Numeric>> = terms.iter().map(|t| t.as_literal().and_then(Literal::numeric)).collect();
    let Some(numbers) = numbers else { return json!({ "values": [] }) };
    let integers: Option<Vec<i128>> = numbers.iter().map(|n| if let Numeric::Integer(i) = n { Some(*i) } else { None }).collect();
    let total = numbers.iter().map(|n| n.as_f64()).sum::<f64>();
    match function {
        AggregateFn::Sum => match integers {
            Some(ints) => decimal(ints.iter().sum::<i128>().to_string()),
            None => decimal(total.to_string()),
        },
        _ if numbers.is_empty() => json!({ "values": [] }),
        _ => decimal((total / numbers.len() as f64).to_string()),
    }
}

fn build(walks: &[&Walk], depth: usize, kind: Kind, aggregate: Option<AggregateFn>, prefixes: &PrefixMap) -> Value {
    if depth == walks.first().map_or(0, |w| w.levels.len()) {
        return match (kind, aggregate) {
            (Kind::Set, Some(f)) => aggregate_value(f, &walks.iter().map(|w| w.terminal[0].clone()).collect(), prefixes),
            (Kind::Set, None) => set_node(&walks.iter().map(|w| w.terminal[0].clone()).collect(), prefixes),
            (Kind::View, _) => {
                let mut by_prop: BTreeMap<String, BTreeSet<Term>> = BTreeMap::new();
                for w in walks {
                    by_prop.entry(prefixes.compact(&w.terminal[0])).or_default().insert(w.terminal[1].clone());
                }
                let map: Map<String, Value> = by_prop.into_iter().map(|(k, v)| (k, set_node(&v, prefixes))).collect();
                json!({ "id-map": map })
            }
        };
    }
    let mut groups: BTreeMap<&Term, Vec<&Walk>> = BTreeMap::new();
    for w in walks {
        groups.entry(&w.levels[depth]).or_default().push(w);
    }
    let mut id_map = Map::new();
    let mut value_map: Vec<(&Literal, Value)> = Vec::new();
    for (key, members) in groups {
        let child = build(&members, depth + 1, kind, aggregate, prefixes);
        match key {
            Term::Literal(l) => value_map.push((l, child)),
            other => {
                id_map.insert(prefixes.compact(other), child);
            }
        }
    }
    value_map.sort_by(|a, b| (&a.0.lexical, &a.0.datatype, &a.0.language).cmp(&(&b.0.lexical, &b.0.datatype, &b.0.language)));
    let mut node = Map::new();
    if !id_map.is_empty() || value_map.is_empty() {
        node.insert("id-map".into(), Value::Object(id_map));
    }
    if !value_map.is_empty() {
        node.insert("value-map".into(), value_map.into_iter().map(|(l, child)| json!([value_object(l, prefixes), child])).collect());
    }
    Value::Object(node)
}

/// Expected GET body, or `None` when the request is outside the oracle's
/// scope (sort, limit, namespace lookups, invalid paths).
pub fn oracle_get(graph: &[Triple], target: &str, prefixes: &PrefixMap) -> Option<Value> {
    let path = ApiPath::parse(target).ok()?;
    let mut regex = None;
    let mut aggregate = None;
    for op in &path.rql {
        match op {
            RqlOp::Regex(p) => regex = Some(regex::Regex::new(p).ok()?),
            RqlOp::Aggregate(f) => aggregate = Some(*f),
            RqlOp::Sort { .. } | RqlOp::Limit { .. } => return None,
        }
    }
    for seg in &path.segments {
        match seg {
            Segment::Res(ResRef::Id(id)) | Segment::Prop(PropRef::Id(id)) => {
                prefixes.expand_token(id).ok()?;
            }
            Segment::Prop(PropRef::Path(p)) => {
                p.try_map(&mut |id| prefixes.expand_token(id)).ok()?;
            }
            _ => {}
        }
    }
    let rdf_type = Term::iri(vocab::RDF_TYPE);
    let universe = nodes(graph);
    let subjects: BTreeSet<Term> = graph.iter().map(|t| t.subject.clone()).collect();
    let segments = &path.segments;
    let n = segments.len();
    let class = match &path.entry {
        EntryPoint::Namespace(_) => return None,
        EntryPoint::Resource => None,
        EntryPoint::Class(ClassRef::Wildcard) => Some(None),
        EntryPoint::Class(ClassRef::Id(id)) => Some(Some(prefixes.expand_token(id).ok()?)),
    };
    let fixed: Vec<Option<Term>> = segments
        .iter()
        .map(|s| match s {
            Segment::Res(r) => fixed_res(r, prefixes),
            Segment::Prop(_) => None,
        })
        .collect();

    // partial walks: (level keys, bindings per segment)
    let mut partial: Vec<(Vec<Term>, Vec<Term>)> = Vec::new();
    let starts: Vec<Term> = match (n, &fixed.first()) {
        (0, _) => match &class {
            Some(_) => universe.iter().cloned().collect(),
            None => subjects.iter().cloned().collect(),
        },
        (_, Some(Some(t))) => vec![t.clone()],
        (1, _) if class.is_none() => subjects.iter().cloned().collect(),
        _ => universe.iter().chain(fixed.iter().flatten()).cloned().collect::<BTreeSet<_>>().into_iter().collect(),
    };
    for start in starts {
        match &class {
            None => partial.push((vec![], vec![start])),
            Some(Some(c)) => {
                if graph.contains(&Triple::new(start.clone(), rdf_type.clone(), c.clone())) {
                    partial.push((vec![], vec![start]));
                }
            }
            Some(None) => {
                for t in graph.iter().filter(|t| t.subject == start && t.predicate == rdf_type) {
                    partial.push((vec![t.object.clone()], vec![start.clone()]));
                }
            }
        }
    }
    if n > 1 && fixed[0].is_none() {
        for (levels, bound) in &mut partial {
            levels.push(bound[0].clone());
        }
    }
    let mut i = 1;
    while i < n {
        let Segment::Prop(prop) = &segments[i] else { unreachable!() };
        let object_fixed = fixed.get(i + 1).cloned().flatten();
        let last_prop = i == n - 1;
        let mut next = Vec::new();
        for (levels, bound) in &partial {
            let subject = bound.last().unwrap();
            let mut steps: Vec<(Option<Term>, Term)> = Vec::new();
            match prop {
                PropRef::Id(id) | PropRef::Path(PropertyPath::Link(id)) => {
                    let p = prefixes.expand_token(id).unwrap();
                    steps.extend(graph.iter().filter(|t| &t.subject == subject && t.predicate == p).map(|t| (None, t.object.clone())));
                }
                PropRef::Wildcard => {
                    steps.extend(graph.iter().filter(|t| &t.subject == subject).map(|t| (Some(t.predicate.clone()), t.object.clone())));
                }
                PropRef::Path(expr) => {
                    let expr = expr.try_map(&mut |id| prefixes.expand_token(id)).unwrap();
                    let mut local = universe.clone();
                    local.extend(fixed[i - 1].iter().cloned());
                    local.extend(object_fixed.iter().cloned());
                    steps.extend(relation(&expr, graph, &local).into_iter().filter(|(a, _)| a == subject).map(|(_, b)| (None, b)));
                }
            }
            for (predicate, object) in steps {
                if object_fixed.as_ref().is_some_and(|f| f != &object) {
                    continue;
                }
                let mut levels = levels.clone();
                if let Some(p) = predicate.filter(|_| !last_prop) {
                    levels.push(p);
                }
                if object_fixed.is_none() && i + 1 < n - 1 {
                    levels.push(object.clone());
                }
                let mut bound = bound.clone();
                bound.push(object);
                next.push((levels, bound));
            }
        }
        partial = next;
        i += 2;
    }

    let ends_fixed = n > 0 && n % 2 == 1 && fixed[n - 1].is_some();
    let kind = if ends_fixed { Kind::View } else { Kind::Set };
    let mut walks: BTreeSet<Walk> = BTreeSet::new();
    for (levels, bound) in partial {
        let last = bound.last().unwrap().clone();
        if kind == Kind::View {
            for t in graph.iter().filter(|t| t.subject == last) {
                walks.insert(Walk { levels: levels.clone(), terminal: vec![t.predicate.clone(), t.object.clone()] });
            }
        } else {
            walks.insert(Walk { levels, terminal: vec![last] });
        }
    }
    if let Some(re) = &regex {
        walks.retain(|w| re.is_match(&w.terminal.last().unwrap().str_value()));
    }
    if aggregate.is_some() && kind == Kind::View {
        return None;
    }
    let level_count = nonterminal_wildcards(&path);
    if walks.is_empty() {
        return Some(match (kind, aggregate) {
            (Kind::Set, Some(f)) if level_count == 0 => aggregate_value(f, &BTreeSet::new(), prefixes),
            (Kind::Set, Some(_)) => json!({ "id-map": {} }),
            (Kind::Set, None) => json!({ "ids": [] }),
            (Kind::View, _) => json!({ "id-map": {} }),
        });
    }
    let walks: Vec<&Walk> = walks.iter().collect();
    assert_eq!(walks[0].levels.len(), level_count, "oracle level bookkeeping for {target}");
    Some(build(&walks, 0, kind, aggregate, prefixes))
}

/// Equality where `xsd:decimal` values may differ by a relative 1e-9.
pub fn json_close(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            if x.get("datatype") == Some(&json!("xsd:decimal")) && y.get("datatype") == Some(&json!("xsd:decimal")) {
                let num = |v: &Map<String, Value>| v.get("value").and_then(Value::as_str).and_then(|s| s.parse::<f64>().ok());
                return match (num(x), num(y)) {
                    (Some(p), Some(q)) => (p - q).abs() <= 1e-9 * p.abs().max(q.abs()).max(1e-300),
                    _ => false,
                };
            }
            x.len() == y.len() && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| json_close(v, w)))
        }
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(v, w)| json_close(v, w)),
        _ => a == b,
    }
}

// ---------------------------------------------------------------------------
// Random write bodies.

pub fn random_body(rng: &mut impl Rng, depth: usize) -> Value {
    let mut id_map = Map::new();
    for _ in 0..rng.random_range(0..4) {
        let prop = *[LINKS, LABELS, NUMBERS].concat().choose(rng).unwrap();
        let mut node = Map::new();
        if rng.random_bool(0.6) {
            let ids: BTreeSet<&str> = (0..rng.random_range(1..3)).map(|_| *NODES.choose(rng).unwrap()).collect();
            node.insert("ids".into(), json!(ids));
        }
        if rng.random_bool(0.5) {
            let prefixes = PrefixMap::with_defaults();
            let literals: BTreeSet<Literal> =
                (0..rng.random_range(1..3)).map(|_| if rng.random_bool(0.5) { random_label(rng) } else { random_number(rng) }).collect();
            node.insert("values".into(), literals.iter().map(|l| value_object(l, &prefixes)).collect());
        }
        if depth > 0 && rng.random_bool(0.15) {
            let child = random_body(rng, depth - 1);
            node.insert("id-map".into(), json!({ "ex:nested": child }));
        }
        if !node.is_empty() {
            id_map.insert(prop.to_string(), Value::Object(node));
        }
    }
    json!({ "id-map": id_map })
}

/// Path token for a node.
pub fn path_id(term: &Term) -> String {
    encode_id(&IdToken::parse(&PrefixMap::with_defaults().compact(term)).unwrap())
}

fn pick(rng: &mut impl Rng) -> Term {
    expand(NODES.choose(rng).unwrap())
}

/// A random GET, POST, PUT or DELETE touching the vocabulary of `graph`.
pub fn random_request(rng: &mut impl Rng, graph: &[Triple]) -> Request {
    match rng.random_range(0..10) {
        0..=3 => Request::new("GET", random_path(rng, graph), None),
        4..=5 => {
            let target = if rng.random_bool(0.5) { format!("/api/class/{}", CLASSES.choose(rng).unwrap()) } else { "/api/resource".into() };
            Request::new("POST", target, Some(random_body(rng, 1)))
        }
        6..=7 => Request::new("PUT", format!("/api/resource/{}", path_id(&pick(rng))), Some(random_body(rng, 1))),
        _ => {
            let x = path_id(&pick(rng));
            let target = match rng.random_range(0..3) {
                0 => format!("/api/resource/{x}"),
                1 => format!("/api/resource/{x}/{}", LINKS.choose(rng).unwrap()),
                _ => format!("/api/resource/{x}/{}/{}", LINKS.choose(rng).unwrap(), path_id(&pick(rng))),
            };
            Request::new("DELETE", target, None)
        }
    }
}
