//! In-memory triple store that evaluates query plans and applies update
//! plans directly.

mod eval;
mod ntriples;
pub mod sparql_text;

use std::collections::{BTreeSet, HashMap};
use std::ops::Bound::Included;

pub use ntriples::{parse_ntriples, NTriplesError};
pub use sparql_text::{parse_query, parse_update, SparqlParseError};

use crate::query::QueryPlan;
use crate::results::SolutionTable;
use crate::term::{Term, Triple};
use crate::update::UpdatePlan;

pub(crate) type Id = u32;
type Key = (Id, Id, Id);

/// Dictionary-encoded triple set with subject, predicate and object indexes.
/// Interned terms are never forgotten, so ids stay stable across updates.
#[derive(Debug, Clone, Default)]
pub struct TripleStore {
    terms: Vec<Term>,
    ids: HashMap<Term, Id>,
    spo: BTreeSet<Key>,
    pos: BTreeSet<Key>,
    osp: BTreeSet<Key>,
}

impl PartialEq for TripleStore {
    fn eq(&self, other: &Self) -> bool {
        self.triples() == other.triples()
    }
}

impl Eq for TripleStore {}

impl TripleStore {
    pub fn new() -> TripleStore {
        TripleStore::default()
    }

    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> TripleStore {
        let mut store = TripleStore::new();
        for t in triples {
            store.insert(t);
        }
        store
    }

    pub(crate) fn id(&self, term: &Term) -> Option<Id> {
        self.ids.get(term).copied()
    }

    pub(crate) fn term(&self, id: Id) -> &Term {
        &self.terms[id as usize]
    }

    pub(crate) fn term_count(&self) -> usize {
        self.terms.len()
    }

    fn intern(&mut self, term: Term) -> Id {
        if let Some(id) = self.ids.get(&term) {
            return *id;
        }
        let id = Id::try_from(self.terms.len()).expect("term dictionary overflow");
        self.terms.push(term.clone());
        self.ids.insert(term, id);
        id
    }

    /// Returns whether the triple was new.
    pub fn insert(&mut self, triple: Triple) -> bool {
        assert!(!triple.subject.is_literal(), "literal subject");
        assert!(matches!(triple.predicate, Term::Iri(_)), "predicate must be an IRI");
        let s = self.intern(triple.subject);
        let p = self.intern(triple.predicate);
        let o = self.intern(triple.object);
        if !self.spo.insert((s, p, o)) {
            return false;
        }
        self.pos.insert((p, o, s));
        self.osp.insert((o, s, p));
        true
    }

    /// Returns whether the triple was present.
    pub fn remove(&mut self, triple: &Triple) -> bool {
        let (Some(s), Some(p), Some(o)) = (self.id(&triple.subject), self.id(&triple.predicate), self.id(&triple.object)) else {
            return false;
        };
        self.remove_ids((s, p, o))
    }

    fn remove_ids(&mut self, (s, p, o): Key) -> bool {
        if !self.spo.remove(&(s, p, o)) {
            return false;
        }
        self.pos.remove(&(p, o, s));
        self.osp.remove(&(o, s, p));
        true
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        match (self.id(&triple.subject), self.id(&triple.predicate), self.id(&triple.object)) {
            (Some(s), Some(p), Some(o)) => self.spo.contains(&(s, p, o)),
            _ => false,
        }
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    /// All triples in term order.
    pub fn triples(&self) -> Vec<Triple> {
        let mut out: Vec<Triple> = self.spo.iter().map(|&k| self.triple(k)).collect();
        out.sort();
        out
    }

    fn triple(&self, (s, p, o): Key) -> Triple {
        Triple::new(self.term(s).clone(), self.term(p).clone(), self.term(o).clone())
    }

    /// Triples matching the bound positions, as `(s, p, o)` ids.
    pub(crate) fn scan(&self, s: Option<Id>, p: Option<Id>, o: Option<Id>) -> Vec<Key> {
        fn range(index: &BTreeSet<Key>, a: Id, b: Option<Id>) -> impl Iterator<Item = &Key> {
            let (lo, hi) = match b {
                Some(b) => ((a, b, Id::MIN), (a, b, Id::MAX)),
                None => ((a, Id::MIN, Id::MIN), (a, Id::MAX, Id::MAX)),
            };
            index.range((Included(lo), Included(hi)))
        }
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                if self.spo.contains(&(s, p, o)) {
                    vec![(s, p, o)]
                } else {
                    Vec::new()
                }
            }
            (Some(s), p, None) => range(&self.spo, s, p).copied().collect(),
            (None, Some(p), o) => range(&self.pos, p, o).map(|&(p, o, s)| (s, p, o)).collect(),
            (s, None, Some(o)) => range(&self.osp, o, s).map(|&(o, s, p)| (s, p, o)).collect(),
            (None, None, None) => self.spo.iter().copied().collect(),
        }
    }

    /// Every term occurring as a subject or object.
    pub(crate) fn nodes(&self) -> BTreeSet<Id> {
        let mut nodes: BTreeSet<Id> = self.spo.iter().map(|k| k.0).collect();
        nodes.extend(self.osp.iter().map(|k| k.0));
        nodes
    }

    /// Loads N-Triples text, returning the number of lines parsed as
    /// triples (duplicates included).
    pub fn load_ntriples(&mut self, text: &str) -> Result<usize, NTriplesError> {
        let triples = parse_ntriples(text)?;
        let count = triples.len();
        for t in triples {
            self.insert(t);
        }
        Ok(count)
    }

    /// N-Triples serialization in term order.
    pub fn dump_ntriples(&self) -> String {
        let mut out = String::new();
        for t in self.triples() {
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out
    }

    pub fn eval(&self, plan: &QueryPlan) -> SolutionTable {
        eval::evaluate(self, plan)
    }

    /// Removes every match of the delete patterns, then adds the inserts.
    /// Returns `(deleted, inserted)` counts of triples that changed.
    pub fn apply(&mut self, plan: &UpdatePlan) -> (usize, usize) {
        let mut doomed = BTreeSet::new();
        for pattern in &plan.deletes {
            doomed.extend(eval::match_pattern(self, pattern));
        }
        let deleted = doomed.into_iter().filter(|&k| self.remove_ids(k)).count();
        let inserted = plan.inserts.iter().filter(|t| self.insert((*t).clone())).count();
        (deleted, inserted)
    }
}
