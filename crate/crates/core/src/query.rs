//! Compiles GET paths into query plans and shape descriptors.
//!
//! Every RES/PROP pair adds one triple pattern chaining subject to object.
//! Wildcards become fresh variables (`v0`, `v1`, ... in path order); each
//! wildcard in a non-terminal position becomes one nesting level of the
//! response. Property paths are used as predicates and never projected.

use std::fmt;

use thiserror::Error;

use crate::namespace::{IdToken, NamespaceError, PrefixMap};
use crate::path::{AggregateFn, ApiPath, ClassRef, EntryPoint, LiteralToken, PropRef, PropertyPath, ResRef, RqlOp, Segment, SortDirection};
use crate::term::{vocab, Literal, Term};

/// Maximum LIMIT appended when the client gives none.
pub const DEFAULT_MAX_LIMIT: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Namespace(#[from] NamespaceError),
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("sorting by a property is undefined for an object view")]
    SortKeyOnObjectView,
    #[error("`/namespace` paths are not queries")]
    NotAQuery,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable(String);

impl Variable {
    pub fn new(name: impl Into<String>) -> Variable {
        Variable(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternTerm {
    Var(Variable),
    Term(Term),
}

impl PatternTerm {
    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Term(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Predicate {
    Var(Variable),
    Iri(Term),
    Path(PropertyPath<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: Predicate,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn variables(&self) -> Vec<&Variable> {
        let mut vars = Vec::new();
        vars.extend(self.subject.as_var());
        if let Predicate::Var(v) = &self.predicate {
            vars.push(v);
        }
        vars.extend(self.object.as_var());
        vars
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Filter {
    /// `regex(str(?var), pattern)`, case-sensitive.
    Regex { var: Variable, pattern: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderKey {
    pub var: Variable,
    pub direction: SortDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slice {
    pub limit: u64,
    pub offset: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aggregate {
    pub function: AggregateFn,
    /// Aggregated over the distinct bindings of this variable.
    pub over: Variable,
    pub alias: Variable,
    /// `COUNT(DISTINCT over)`, projected next to averages so that an empty
    /// input can be told apart from an average of zero.
    pub count_alias: Option<Variable>,
}

/// A compiled read: `SELECT DISTINCT` over a basic graph pattern.
/// When `aggregate` is set, `projection` doubles as the GROUP BY list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryPlan {
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<Filter>,
    pub projection: Vec<Variable>,
    pub aggregate: Option<Aggregate>,
    pub order: Vec<OrderKey>,
    pub slice: Option<Slice>,
}

impl QueryPlan {
    /// Output columns, in order.
    pub fn output_vars(&self) -> Vec<Variable> {
        let mut vars = self.projection.clone();
        if let Some(agg) = &self.aggregate {
            vars.push(agg.alias.clone());
            vars.extend(agg.count_alias.clone());
        }
        vars
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestLevel {
    pub var: Variable,
    pub binds_literals: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Terminal {
    /// Outgoing edges of a concrete node: an `id-map` keyed by property.
    ObjectView { property: Variable, value: Variable },
    TermSet(Variable),
    InstanceSet(Variable),
    AggregateValue { function: AggregateFn, value: Variable, count: Option<Variable> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeDescriptor {
    pub levels: Vec<NestLevel>,
    pub terminal: Terminal,
    /// An explicit sort is present: keep solution order instead of sorting.
    pub ordered: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledQuery {
    pub plan: QueryPlan,
    pub shape: ShapeDescriptor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    pub max_limit: u64,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { max_limit: DEFAULT_MAX_LIMIT }
    }
}

#[derive(Default)]
struct VarGen(usize);

impl VarGen {
    fn fresh(&mut self) -> Variable {
        let v = Variable(format!("v{}", self.0));
        self.0 += 1;
        v
    }
}

pub(crate) fn literal_from_token(token: &LiteralToken, prefixes: &PrefixMap) -> Result<Literal, NamespaceError> {
    Ok(match (&token.language, &token.datatype) {
        (Some(lang), _) => Literal::lang(token.lexical.clone(), lang.clone()),
        (None, Some(dt)) => match prefixes.expand_token(dt)? {
            Term::Iri(iri) => Literal::typed(token.lexical.clone(), iri),
            other => return Err(NamespaceError::InvalidToken(other.str_value())),
        },
        (None, None) => Literal::string(token.lexical.clone()),
    })
}

pub(crate) fn expand_res(res: &ResRef, prefixes: &PrefixMap) -> Result<Option<Term>, NamespaceError> {
    Ok(match res {
        ResRef::Id(id) => Some(prefixes.expand_token(id)?),
        ResRef::Literal(lit) => Some(Term::Literal(literal_from_token(lit, prefixes)?)),
        ResRef::Wildcard => None,
    })
}

pub(crate) fn expand_path(path: &PropertyPath<IdToken>, prefixes: &PrefixMap) -> Result<PropertyPath<Term>, NamespaceError> {
    path.try_map(&mut |id| prefixes.expand_token(id))
}

fn rdf_type() -> Predicate {
    Predicate::Iri(Term::Iri(vocab::RDF_TYPE.to_string()))
}

/// Compiles a GET path.
pub fn compile_get(path: &ApiPath, prefixes: &PrefixMap, options: CompileOptions) -> Result<CompiledQuery, CompileError> {
    let mut vars = VarGen::default();
    let mut patterns = Vec::new();
    let mut levels = Vec::new();
    let segments = &path.segments;
    let n = segments.len();

    let class = match &path.entry {
        EntryPoint::Namespace(_) => return Err(CompileError::NotAQuery),
        EntryPoint::Resource => None,
        EntryPoint::Class(ClassRef::Id(id)) => Some(PatternTerm::Term(prefixes.expand_token(id)?)),
        EntryPoint::Class(ClassRef::Wildcard) => {
            let v = vars.fresh();
            levels.push(NestLevel { var: v.clone(), binds_literals: false });
            Some(PatternTerm::Var(v))
        }
    };

    let terminal;
    if n == 0 {
        let instance = vars.fresh();
        match class {
            Some(class) => {
                patterns.push(TriplePattern {
                    subject: PatternTerm::Var(instance.clone()),
                    predicate: rdf_type(),
                    object: class,
                });
                terminal = Terminal::InstanceSet(instance);
            }
            None => {
                // bare `/resource` lists every subject, like `/resource/*`
                patterns.push(TriplePattern {
                    subject: PatternTerm::Var(instance.clone()),
                    predicate: Predicate::Var(vars.fresh()),
                    object: PatternTerm::Var(vars.fresh()),
                });
                terminal = Terminal::TermSet(instance);
            }
        }
    } else {
        let first_is_path = matches!(segments.get(1), Some(Segment::Prop(PropRef::Path(_))));
        let Segment::Res(first) = &segments[0] else {
            unreachable!("segments start with a RES")
        };
        let mut current = match expand_res(first, prefixes)? {
            Some(term) => PatternTerm::Term(term),
            None => {
                let v = vars.fresh();
                if n > 1 {
                    levels.push(NestLevel { var: v.clone(), binds_literals: first_is_path });
                }
                PatternTerm::Var(v)
            }
        };
        if let Some(class) = class.clone() {
            patterns.push(TriplePattern { subject: current.clone(), predicate: rdf_type(), object: class });
        }
        let mut prop_terminal_var = None;
        let mut i = 1;
        while i < n {
            let Segment::Prop(prop) = &segments[i] else {
                unreachable!("odd positions are PROP")
            };
            let prop_is_terminal = i == n - 1;
            let predicate = match prop {
                PropRef::Id(id) => Predicate::Iri(prefixes.expand_token(id)?),
                PropRef::Path(PropertyPath::Link(id)) => Predicate::Iri(prefixes.expand_token(id)?),
                PropRef::Path(p) => Predicate::Path(expand_path(p, prefixes)?),
                PropRef::Wildcard => {
                    let v = vars.fresh();
                    if !prop_is_terminal {
                        levels.push(NestLevel { var: v.clone(), binds_literals: false });
                    }
                    Predicate::Var(v)
                }
            };
            let object = match segments.get(i + 1) {
                Some(Segment::Res(res)) => match expand_res(res, prefixes)? {
                    Some(term) => PatternTerm::Term(term),
                    None => {
                        let v = vars.fresh();
                        if i + 1 < n - 1 {
                            levels.push(NestLevel { var: v.clone(), binds_literals: true });
                        }
                        PatternTerm::Var(v)
                    }
                },
                Some(Segment::Prop(_)) => unreachable!("even positions are RES"),
                None => {
                    let v = vars.fresh();
                    prop_terminal_var = Some(v.clone());
                    PatternTerm::Var(v)
                }
            };
            patterns.push(TriplePattern { subject: current, predicate, object: object.clone() });
            current = object;
            i += 2;
        }
        terminal = if let Some(v) = prop_terminal_var {
            Terminal::TermSet(v)
        } else {
            match current {
                PatternTerm::Var(v) => {
                    if n == 1 && class.is_none() {
                        patterns.push(TriplePattern {
                            subject: PatternTerm::Var(v.clone()),
                            predicate: Predicate::Var(vars.fresh()),
                            object: PatternTerm::Var(vars.fresh()),
                        });
                    }
                    Terminal::TermSet(v)
                }
                PatternTerm::Term(term) => {
                    let property = vars.fresh();
                    let value = vars.fresh();
                    patterns.push(TriplePattern {
                        subject: PatternTerm::Term(term),
                        predicate: Predicate::Var(property.clone()),
                        object: PatternTerm::Var(value.clone()),
                    });
                    Terminal::ObjectView { property, value }
                }
            }
        };
    }

    let mut plan = QueryPlan {
        patterns,
        filters: Vec::new(),
        projection: levels.iter().map(|l| l.var.clone()).collect(),
        aggregate: None,
        order: Vec::new(),
        slice: None,
    };
    let mut shape = ShapeDescriptor { levels, terminal, ordered: false };
    map_rql(&path.rql, &mut plan, &mut shape, &mut vars, prefixes)?;
    if plan.slice.is_none() {
        plan.slice = Some(Slice { limit: options.max_limit, offset: 0 });
    }
    Ok(CompiledQuery { plan, shape })
}

/// Adds the terminal columns and applies RQL modifiers.
fn map_rql(
    ops: &[RqlOp],
    plan: &mut QueryPlan,
    shape: &mut ShapeDescriptor,
    vars: &mut VarGen,
    prefixes: &PrefixMap,
) -> Result<(), CompileError> {
    let level_vars: Vec<Variable> = shape.levels.iter().map(|l| l.var.clone()).collect();
    let (subject, filter_var) = match &shape.terminal {
        Terminal::TermSet(v) | Terminal::InstanceSet(v) => (Some(v.clone()), v.clone()),
        Terminal::ObjectView { value, .. } => (None, value.clone()),
        Terminal::AggregateValue { .. } => unreachable!("aggregates are introduced here"),
    };
    let aggregate = ops.iter().find_map(|op| match op {
        RqlOp::Aggregate(f) => Some(*f),
        _ => None,
    });
    let sort = ops.iter().find_map(|op| match op {
        RqlOp::Sort { direction, key } => Some((*direction, key.clone())),
        _ => None,
    });

    for op in ops {
        match op {
            RqlOp::Regex(pattern) => plan.filters.push(Filter::Regex { var: filter_var.clone(), pattern: pattern.clone() }),
            RqlOp::Limit { count, offset } => plan.slice = Some(Slice { limit: *count, offset: *offset }),
            _ => {}
        }
    }

    if let Some(function) = aggregate {
        let Some(over) = subject else {
            return Err(CompileError::UnsupportedShape(format!("{}() needs a list of ids or values, not an object view", function.name())));
        };
        let alias = vars.fresh();
        let count_alias = (function == AggregateFn::Avg).then(|| vars.fresh());
        plan.projection = level_vars.clone();
        plan.aggregate = Some(Aggregate { function, over, alias: alias.clone(), count_alias: count_alias.clone() });
        if let Some((direction, key)) = sort {
            if key.is_some() {
                return Err(CompileError::UnsupportedShape("sorting by a property cannot be combined with an aggregate".into()));
            }
            plan.order.push(OrderKey { var: alias.clone(), direction });
            plan.order.extend(level_vars.iter().map(|v| OrderKey { var: v.clone(), direction: SortDirection::Ascending }));
            shape.ordered = true;
        }
        shape.terminal = Terminal::AggregateValue { function, value: alias, count: count_alias };
        return Ok(());
    }

    match (&shape.terminal, subject) {
        (Terminal::ObjectView { property, value }, _) => {
            if sort.is_some() {
                return Err(CompileError::SortKeyOnObjectView);
            }
            plan.projection.push(property.clone());
            plan.projection.push(value.clone());
        }
        (_, Some(subject)) => {
            plan.projection.push(subject.clone());
            if let Some((direction, key)) = sort {
                shape.ordered = true;
                match key {
                    None => plan.order.push(OrderKey { var: subject.clone(), direction }),
                    Some(key) => {
                        let key_var = vars.fresh();
                        plan.patterns.push(TriplePattern {
                            subject: PatternTerm::Var(subject.clone()),
                            predicate: Predicate::Iri(prefixes.expand_token(&key)?),
                            object: PatternTerm::Var(key_var.clone()),
                        });
                        plan.projection.push(key_var.clone());
                        plan.order.push(OrderKey { var: key_var, direction });
                        plan.order.push(OrderKey { var: subject.clone(), direction: SortDirection::Ascending });
                    }
                }
                plan.order.extend(level_vars.iter().map(|v| OrderKey { var: v.clone(), direction: SortDirection::Ascending }));
            }
        }
        _ => unreachable!(),
    }
    Ok(())
}
