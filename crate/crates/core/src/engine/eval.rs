//! Plan evaluation: nested-loop index joins over the basic graph pattern,
//! then filter, group/aggregate, project, distinct, order and slice.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use super::{Id, Key, TripleStore};
use crate::path::{AggregateFn, PropertyPath, SortDirection};
use crate::query::{Aggregate, Filter, PatternTerm, Predicate, QueryPlan, TriplePattern, Variable};
use crate::results::SolutionTable;
use crate::term::{format_decimal, Literal, Numeric, Term};

/// Store ids plus ids for plan terms absent from the store. Absent terms
/// match no triple but still take part in zero-length paths.
struct Dict<'a> {
    store: &'a TripleStore,
    extra: Vec<Term>,
    extra_ids: HashMap<Term, Id>,
}

impl<'a> Dict<'a> {
    fn new(store: &'a TripleStore) -> Self {
        Dict { store, extra: Vec::new(), extra_ids: HashMap::new() }
    }

    fn id(&mut self, term: &Term) -> Id {
        if let Some(id) = self.store.id(term) {
            return id;
        }
        if let Some(id) = self.extra_ids.get(term) {
            return *id;
        }
        let id = (self.store.term_count() + self.extra.len()) as Id;
        self.extra.push(term.clone());
        self.extra_ids.insert(term.clone(), id);
        id
    }

    fn term(&self, id: Id) -> &Term {
        let n = self.store.term_count();
        if (id as usize) < n {
            self.store.term(id)
        } else {
            &self.extra[id as usize - n]
        }
    }
}

type Row = Vec<Option<Id>>;

struct Slots(Vec<Variable>);

impl Slots {
    fn of(&mut self, var: &Variable) -> usize {
        match self.0.iter().position(|v| v == var) {
            Some(i) => i,
            None => {
                self.0.push(var.clone());
                self.0.len() - 1
            }
        }
    }

    fn get(&self, var: &Variable) -> Option<usize> {
        self.0.iter().position(|v| v == var)
    }
}

enum Slot {
    Var(usize),
    Fixed(Id),
}

impl Slot {
    fn value(&self, row: &Row) -> Option<Id> {
        match self {
            Slot::Var(i) => row[*i],
            Slot::Fixed(id) => Some(*id),
        }
    }

    /// Binds `id` into `row`, failing on a conflicting binding.
    fn bind(&self, row: &mut Row, id: Id) -> bool {
        match self {
            Slot::Fixed(fixed) => *fixed == id,
            Slot::Var(i) => match row[*i] {
                Some(existing) => existing == id,
                None => {
                    row[*i] = Some(id);
                    true
                }
            },
        }
    }
}

fn slot(term: &PatternTerm, slots: &mut Slots, dict: &mut Dict) -> Slot {
    match term {
        PatternTerm::Var(v) => Slot::Var(slots.of(v)),
        PatternTerm::Term(t) => Slot::Fixed(dict.id(t)),
    }
}

/// Pairs `(subject, object)` connected by `path`, restricted to the bound ends.
fn path_pairs(store: &TripleStore, path: &PropertyPath<Id>, s: Option<Id>, o: Option<Id>) -> BTreeSet<(Id, Id)> {
    match path {
        PropertyPath::Link(p) => store.scan(s, Some(*p), o).into_iter().map(|(s, _, o)| (s, o)).collect(),
        PropertyPath::Inverse(inner) => path_pairs(store, inner, o, s).into_iter().map(|(a, b)| (b, a)).collect(),
        PropertyPath::Alternative(items) => items.iter().flat_map(|p| path_pairs(store, p, s, o)).collect(),
        PropertyPath::Sequence(items) => sequence_pairs(store, items, s, o),
        PropertyPath::ZeroOrOne(inner) => {
            let mut pairs = path_pairs(store, inner, s, o);
            pairs.extend(zero_length(store, s, o));
            pairs
        }
        PropertyPath::OneOrMore(inner) => closure(store, inner, s, o),
        PropertyPath::ZeroOrMore(inner) => {
            let mut pairs = closure(store, inner, s, o);
            pairs.extend(zero_length(store, s, o));
            pairs
        }
    }
}

fn sequence_pairs(store: &TripleStore, items: &[PropertyPath<Id>], s: Option<Id>, o: Option<Id>) -> BTreeSet<(Id, Id)> {
    let rest = |slice: &[PropertyPath<Id>]| -> PropertyPath<Id> {
        if slice.len() == 1 {
            slice[0].clone()
        } else {
            PropertyPath::Sequence(slice.to_vec())
        }
    };
    let mut out = BTreeSet::new();
    if s.is_none() && o.is_some() {
        // join right to left from the bound object
        let (init, last) = items.split_at(items.len() - 1);
        let init = rest(init);
        for (mid, end) in path_pairs(store, &last[0], None, o) {
            out.extend(path_pairs(store, &init, s, Some(mid)).into_iter().map(|(start, _)| (start, end)));
        }
    } else {
        let tail = rest(&items[1..]);
        for (start, mid) in path_pairs(store, &items[0], s, None) {
            out.extend(path_pairs(store, &tail, Some(mid), o).into_iter().map(|(_, end)| (start, end)));
        }
    }
    out
}

fn zero_length(store: &TripleStore, s: Option<Id>, o: Option<Id>) -> Vec<(Id, Id)> {
    match (s, o) {
        (Some(s), Some(o)) if s == o => vec![(s, s)],
        (Some(_), Some(_)) => Vec::new(),
        (Some(x), None) | (None, Some(x)) => vec![(x, x)],
        (None, None) => store.nodes().into_iter().map(|n| (n, n)).collect(),
    }
}

/// Nodes reachable in one or more steps, by breadth-first search.
fn reachable(store: &TripleStore, step: &PropertyPath<Id>, from: Id, forward: bool) -> BTreeSet<Id> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([from]);
    while let Some(node) = queue.pop_front() {
        let next = if forward {
            path_pairs(store, step, Some(node), None).into_iter().map(|(_, b)| b).collect::<Vec<_>>()
        } else {
            path_pairs(store, step, None, Some(node)).into_iter().map(|(a, _)| a).collect()
        };
        for n in next {
            if seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen
}

fn closure(store: &TripleStore, step: &PropertyPath<Id>, s: Option<Id>, o: Option<Id>) -> BTreeSet<(Id, Id)> {
    match (s, o) {
        (Some(s), _) => reachable(store, step, s, true)
            .into_iter()
            .filter(|n| o.is_none_or(|o| o == *n))
            .map(|n| (s, n))
            .collect(),
        (None, Some(o)) => reachable(store, step, o, false).into_iter().map(|n| (n, o)).collect(),
        (None, None) => store
            .nodes()
            .into_iter()
            .flat_map(|start| reachable(store, step, start, true).into_iter().map(move |n| (start, n)))
            .collect(),
    }
}

/// Extends `rows` with the matches of one pattern.
fn join(store: &TripleStore, dict: &mut Dict, slots: &mut Slots, rows: Vec<Row>, pattern: &TriplePattern) -> Vec<Row> {
    let s = slot(&pattern.subject, slots, dict);
    let o = slot(&pattern.object, slots, dict);
    let path = match &pattern.predicate {
        Predicate::Path(path) => Some(path.try_map::<Id, ()>(&mut |t| Ok(dict.id(t))).expect("infallible")),
        _ => None,
    };
    let p = match &pattern.predicate {
        Predicate::Var(v) => Some(Slot::Var(slots.of(v))),
        Predicate::Iri(t) => Some(Slot::Fixed(dict.id(t))),
        Predicate::Path(_) => None,
    };
    let width = slots.0.len();
    let mut out = Vec::new();
    for mut row in rows {
        row.resize(width, None);
        let (sv, ov) = (s.value(&row), o.value(&row));
        match (&p, &path) {
            (Some(p), _) => {
                for (ts, tp, to) in store.scan(sv, p.value(&row), ov) {
                    let mut next = row.clone();
                    if s.bind(&mut next, ts) && p.bind(&mut next, tp) && o.bind(&mut next, to) {
                        out.push(next);
                    }
                }
            }
            (None, Some(path)) => {
                for (ts, to) in path_pairs(store, path, sv, ov) {
                    let mut next = row.clone();
                    if s.bind(&mut next, ts) && o.bind(&mut next, to) {
                        out.push(next);
                    }
                }
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Ground matches of a single delete pattern.
pub(super) fn match_pattern(store: &TripleStore, pattern: &TriplePattern) -> Vec<Key> {
    let mut out = Vec::new();
    let fixed = |t: &PatternTerm| match t {
        PatternTerm::Term(t) => store.id(t).map(Some).ok_or(()),
        PatternTerm::Var(_) => Ok(None),
    };
    let (Ok(s), Ok(o)) = (fixed(&pattern.subject), fixed(&pattern.object)) else {
        return out;
    };
    let p = match &pattern.predicate {
        Predicate::Iri(t) => match store.id(t) {
            Some(id) => Some(id),
            None => return out,
        },
        Predicate::Var(_) => None,
        Predicate::Path(_) => unreachable!("delete patterns have no property paths"),
    };
    for key in store.scan(s, p, o) {
        // a variable used twice must bind the same term
        let (ks, kp, ko) = key;
        let by_var: Vec<(&Variable, Id)> = [
            (pattern.subject.as_var(), ks),
            (match &pattern.predicate {
                Predicate::Var(v) => Some(v),
                _ => None,
            }, kp),
            (pattern.object.as_var(), ko),
        ]
        .into_iter()
        .filter_map(|(v, id)| v.map(|v| (v, id)))
        .collect();
        let consistent = by_var.iter().all(|(v, id)| by_var.iter().all(|(w, jd)| v != w || id == jd));
        if consistent {
            out.push(key);
        }
    }
    out
}

/// Total order used by ORDER BY: unbound, blank nodes, IRIs, numeric
/// literals by value, other literals by lexical form, datatype, language.
pub fn compare_terms(a: Option<&Term>, b: Option<&Term>) -> Ordering {
    fn rank(t: Option<&Term>) -> u8 {
        match t {
            None => 0,
            Some(Term::BNode(_)) => 1,
            Some(Term::Iri(_)) => 2,
            Some(Term::Literal(l)) if l.numeric().is_some() => 3,
            Some(Term::Literal(_)) => 4,
        }
    }
    rank(a).cmp(&rank(b)).then_with(|| match (a, b) {
        (Some(Term::BNode(x)), Some(Term::BNode(y))) | (Some(Term::Iri(x)), Some(Term::Iri(y))) => x.cmp(y),
        (Some(Term::Literal(x)), Some(Term::Literal(y))) => {
            let by_value = match (x.numeric(), y.numeric()) {
                (Some(m), Some(n)) => m.total_cmp(n),
                _ => Ordering::Equal,
            };
            by_value.then_with(|| (&x.lexical, &x.datatype, &x.language).cmp(&(&y.lexical, &y.datatype, &y.language)))
        }
        _ => Ordering::Equal,
    })
}

/// Aggregates distinct input terms; `None` when an input is not numeric.
pub fn aggregate_terms(function: AggregateFn, inputs: &[&Term]) -> Option<Term> {
    if function == AggregateFn::Count {
        return Some(Term::Literal(Literal::integer(inputs.len() as i128)));
    }
    let numbers = inputs
        .iter()
        .map(|t| t.as_literal().and_then(Literal::numeric))
        .collect::<Option<Vec<Numeric>>>()?;
    let exact: Option<i128> = numbers.iter().try_fold(0i128, |acc, n| match n {
        Numeric::Integer(i) => acc.checked_add(*i),
        _ => None,
    });
    let count = numbers.len() as i128;
    let literal = match (function, exact) {
        (AggregateFn::Sum, Some(sum)) => Literal::integer(sum),
        (AggregateFn::Sum, None) => Literal::decimal(format_decimal(numbers.iter().map(|n| n.as_f64()).sum())),
        (_, _) if count == 0 => Literal::integer(0),
        (_, Some(sum)) if sum % count == 0 => Literal::decimal((sum / count).to_string()),
        (_, Some(sum)) => Literal::decimal(format_decimal(sum as f64 / count as f64)),
        (_, None) => Literal::decimal(format_decimal(numbers.iter().map(|n| n.as_f64()).sum::<f64>() / count as f64)),
    };
    Some(Term::Literal(literal))
}

pub(super) fn evaluate(store: &TripleStore, plan: &QueryPlan) -> SolutionTable {
    let mut dict = Dict::new(store);
    let mut slots = Slots(Vec::new());
    let mut rows: Vec<Row> = vec![Vec::new()];
    for pattern in &plan.patterns {
        rows = join(store, &mut dict, &mut slots, rows, pattern);
    }
    for filter in &plan.filters {
        match filter {
            Filter::Regex { var, pattern } => {
                let Ok(re) = regex::Regex::new(pattern) else {
                    rows.clear();
                    continue;
                };
                let column = slots.get(var);
                rows.retain(|row| {
                    column
                        .and_then(|c| row.get(c).copied().flatten())
                        .is_some_and(|id| re.is_match(&dict.term(id).str_value()))
                });
            }
        }
    }
    let value = |row: &Row, var: &Variable| -> Option<Term> {
        slots.get(var).and_then(|c| row.get(c).copied().flatten()).map(|id| dict.term(id).clone())
    };
    let out_vars = plan.output_vars();
    let mut table: Vec<Vec<Option<Term>>> = match &plan.aggregate {
        None => rows.iter().map(|row| plan.projection.iter().map(|v| value(row, v)).collect()).collect(),
        Some(agg) => group(&rows, &plan.projection, agg, &value),
    };
    let mut seen = HashSet::new();
    table.retain(|row| seen.insert(row.clone()));
    let order_columns: Vec<(usize, SortDirection)> = plan
        .order
        .iter()
        .filter_map(|k| out_vars.iter().position(|v| *v == k.var).map(|c| (c, k.direction)))
        .collect();
    table.sort_by(|a, b| {
        order_columns.iter().fold(Ordering::Equal, |acc, &(c, dir)| {
            acc.then_with(|| {
                let ord = compare_terms(a[c].as_ref(), b[c].as_ref());
                match dir {
                    SortDirection::Ascending => ord,
                    SortDirection::Descending => ord.reverse(),
                }
            })
        })
    });
    if let Some(slice) = plan.slice {
        table = table.into_iter().skip(slice.offset as usize).take(slice.limit as usize).collect();
    }
    SolutionTable { vars: out_vars.iter().map(|v| v.name().to_string()).collect(), rows: table }
}

fn group(
    rows: &[Row],
    keys: &[Variable],
    agg: &Aggregate,
    value: &dyn Fn(&Row, &Variable) -> Option<Term>,
) -> Vec<Vec<Option<Term>>> {
    let mut groups: Vec<(Vec<Option<Term>>, Vec<Term>)> = Vec::new();
    if keys.is_empty() {
        groups.push((Vec::new(), Vec::new()));
    }
    for row in rows {
        let key: Vec<Option<Term>> = keys.iter().map(|k| value(row, k)).collect();
        let index = match groups.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                groups.push((key, Vec::new()));
                groups.len() - 1
            }
        };
        if let Some(v) = value(row, &agg.over) {
            if !groups[index].1.contains(&v) {
                groups[index].1.push(v);
            }
        }
    }
    groups
        .into_iter()
        .map(|(mut key, inputs)| {
            let refs: Vec<&Term> = inputs.iter().collect();
            key.push(aggregate_terms(agg.function, &refs));
            if agg.count_alias.is_some() {
                key.push(aggregate_terms(AggregateFn::Count, &refs));
            }
            key
        })
        .collect()
}
