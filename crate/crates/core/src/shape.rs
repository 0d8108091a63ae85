//! Turns solution tables into nested `ids` / `values` / `id-map` /
//! `value-map` JSON.
//!
//! Each nest level groups the rows by one variable: resource keys go into
//! `id-map`, literal keys into `value-map` as `[value, node]` pairs. Without
//! an explicit sort, `ids` are sorted and values are sorted by lexical form,
//! then datatype, then language.

use std::cmp::Ordering;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::namespace::PrefixMap;
use crate::path::AggregateFn;
use crate::query::{ShapeDescriptor, Terminal, Variable};
use crate::results::SolutionTable;
use crate::term::{format_decimal, Literal, Numeric, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("result has no column for {0}")]
    ShapeMismatch(String),
    #[error("result column {0} is unbound")]
    Unbound(String),
}

/// A literal as `{value, language?, datatype}`.
pub fn value_object(literal: &Literal, prefixes: &PrefixMap) -> Value {
    let mut obj = Map::new();
    obj.insert("value".into(), literal.lexical.clone().into());
    if let Some(lang) = &literal.language {
        obj.insert("language".into(), lang.clone().into());
    }
    obj.insert("datatype".into(), prefixes.compact_iri(&literal.datatype).into());
    Value::Object(obj)
}

/// An id string for resources, a value object for literals.
pub fn term_to_component(term: &Term, prefixes: &PrefixMap) -> Value {
    match term {
        Term::Literal(l) => value_object(l, prefixes),
        _ => Value::String(prefixes.compact(term)),
    }
}

fn literal_order(a: &Literal, b: &Literal) -> Ordering {
    (&a.lexical, &a.datatype, &a.language).cmp(&(&b.lexical, &b.datatype, &b.language))
}

struct Shaper<'a> {
    table: &'a SolutionTable,
    shape: &'a ShapeDescriptor,
    prefixes: &'a PrefixMap,
    level_columns: Vec<usize>,
}

impl Shaper<'_> {
    fn cell(&self, row: usize, column: usize) -> Option<&Term> {
        self.table.rows[row][column].as_ref()
    }

    fn bound(&self, row: usize, column: usize) -> Result<&Term, ShapeError> {
        self.cell(row, column)
            .ok_or_else(|| ShapeError::Unbound(self.table.vars[column].clone()))
    }

    /// Distinct terms of a column in first-seen row order.
    fn distinct(&self, rows: &[usize], column: usize) -> Result<Vec<(Term, Vec<usize>)>, ShapeError> {
        let mut groups: Vec<(Term, Vec<usize>)> = Vec::new();
        for &row in rows {
            let term = self.bound(row, column)?;
            match groups.iter_mut().find(|(t, _)| t == term) {
                Some((_, members)) => members.push(row),
                None => groups.push((term.clone(), vec![row])),
            }
        }
        Ok(groups)
    }

    fn node(&self, rows: &[usize], level: usize) -> Result<Value, ShapeError> {
        if level == self.level_columns.len() {
            return self.terminal(rows);
        }
        let mut id_map = Map::new();
        let mut value_map: Vec<(Literal, Value)> = Vec::new();
        for (key, members) in self.distinct(rows, self.level_columns[level])? {
            let child = self.node(&members, level + 1)?;
            match key {
                Term::Literal(l) => value_map.push((l, child)),
                other => {
                    id_map.insert(self.prefixes.compact(&other), child);
                }
            }
        }
        if !self.shape.ordered {
            value_map.sort_by(|a, b| literal_order(&a.0, &b.0));
        }
        let mut node = Map::new();
        if !id_map.is_empty() || value_map.is_empty() {
            node.insert("id-map".into(), Value::Object(id_map));
        }
        if !value_map.is_empty() {
            let pairs = value_map
                .into_iter()
                .map(|(l, child)| Value::Array(vec![value_object(&l, self.prefixes), child]))
                .collect();
            node.insert("value-map".into(), Value::Array(pairs));
        }
        Ok(Value::Object(node))
    }

    fn term_set(&self, rows: &[usize], column: usize) -> Result<Value, ShapeError> {
        let terms: Vec<Term> = self.distinct(rows, column)?.into_iter().map(|(t, _)| t).collect();
        Ok(self.term_node(terms))
    }

    fn term_node(&self, terms: Vec<Term>) -> Value {
        let mut ids = Vec::new();
        let mut literals = Vec::new();
        for term in terms {
            match term {
                Term::Literal(l) => literals.push(l),
                other => ids.push(self.prefixes.compact(&other)),
            }
        }
        if !self.shape.ordered {
            ids.sort();
            ids.dedup();
            literals.sort_by(literal_order);
        }
        let mut node = Map::new();
        if !ids.is_empty() || literals.is_empty() {
            node.insert("ids".into(), ids.into());
        }
        if !literals.is_empty() {
            let values = literals.iter().map(|l| value_object(l, self.prefixes)).collect();
            node.insert("values".into(), Value::Array(values));
        }
        Value::Object(node)
    }

    fn terminal(&self, rows: &[usize]) -> Result<Value, ShapeError> {
        match &self.shape.terminal {
            Terminal::TermSet(v) | Terminal::InstanceSet(v) => self.term_set(rows, column(self.table, v)?),
            Terminal::ObjectView { property, value } => {
                let (pc, vc) = (column(self.table, property)?, column(self.table, value)?);
                let mut map = Map::new();
                for (prop, members) in self.distinct(rows, pc)? {
                    map.insert(self.prefixes.compact(&prop), self.term_set(&members, vc)?);
                }
                Ok(json!({ "id-map": map }))
            }
            Terminal::AggregateValue { function, value, count } => {
                let vc = column(self.table, value)?;
                let cc = count.as_ref().map(|c| column(self.table, c)).transpose()?;
                // grouped rows are unique per level key; the first carries the aggregate
                let row = rows.first().copied();
                let result = row.and_then(|r| self.cell(r, vc));
                let count = match (row, cc) {
                    (Some(r), Some(c)) => self.cell(r, c).and_then(|t| t.as_literal()).and_then(Literal::numeric),
                    _ => None,
                };
                Ok(aggregate_node(*function, result, count, row.is_none(), self.prefixes))
            }
        }
    }
}

fn column(table: &SolutionTable, var: &Variable) -> Result<usize, ShapeError> {
    table.column(var.name()).ok_or_else(|| ShapeError::ShapeMismatch(var.to_string()))
}

/// The single value of an aggregate. `empty_input` marks a table that
/// produced no row at all.
fn aggregate_node(function: AggregateFn, result: Option<&Term>, count: Option<Numeric>, empty_input: bool, prefixes: &PrefixMap) -> Value {
    let literal = if empty_input {
        match function {
            AggregateFn::Count => Some(Literal::integer(0)),
            AggregateFn::Sum => Some(Literal::decimal("0")),
            AggregateFn::Avg => None,
        }
    } else {
        let numeric = result.and_then(Term::as_literal).and_then(Literal::numeric);
        let avg_of_nothing = function == AggregateFn::Avg && matches!(count, Some(c) if c.as_f64() == 0.0);
        match (function, numeric) {
            _ if avg_of_nothing => None,
            (AggregateFn::Count, Some(n)) => Some(Literal::integer(match n {
                Numeric::Integer(i) => i,
                other => other.as_f64() as i128,
            })),
            (_, Some(Numeric::Integer(i))) => Some(Literal::decimal(i.to_string())),
            (_, Some(n)) => Some(Literal::decimal(format_decimal(n.as_f64()))),
            (_, None) => None,
        }
    };
    let values: Vec<Value> = literal.iter().map(|l| value_object(l, prefixes)).collect();
    json!({ "values": values })
}

/// Shapes a table for the given descriptor.
pub fn shape(table: &SolutionTable, shape: &ShapeDescriptor, prefixes: &PrefixMap) -> Result<Value, ShapeError> {
    let level_columns = shape
        .levels
        .iter()
        .map(|l| column(table, &l.var))
        .collect::<Result<Vec<_>, _>>()?;
    match &shape.terminal {
        Terminal::TermSet(v) | Terminal::InstanceSet(v) => {
            column(table, v)?;
        }
        Terminal::ObjectView { property, value } => {
            column(table, property)?;
            column(table, value)?;
        }
        Terminal::AggregateValue { value, count, .. } => {
            column(table, value)?;
            count.as_ref().map(|c| column(table, c)).transpose()?;
        }
    }
    let shaper = Shaper { table, shape, prefixes, level_columns };
    let rows: Vec<usize> = (0..table.rows.len()).collect();
    if rows.is_empty() {
        return Ok(match &shape.terminal {
            Terminal::TermSet(_) | Terminal::InstanceSet(_) => json!({ "ids": [] }),
            Terminal::ObjectView { .. } => json!({ "id-map": {} }),
            Terminal::AggregateValue { function, .. } if shape.levels.is_empty() => {
                aggregate_node(*function, None, None, true, prefixes)
            }
            Terminal::AggregateValue { .. } => json!({ "id-map": {} }),
        });
    }
    shaper.node(&rows, 0)
}

/// Number of nested `id-map` / `value-map` layers along the first branch.
pub fn map_depth(node: &Value) -> usize {
    let first_child = node
        .get("id-map")
        .and_then(Value::as_object)
        .and_then(|m| m.values().next())
        .or_else(|| node.get("value-map").and_then(|v| v.get(0)).and_then(|pair| pair.get(1)));
    match first_child {
        Some(child) => 1 + map_depth(child),
        None => 0,
    }
}
