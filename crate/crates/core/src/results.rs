//! Solution tables and the SPARQL 1.1 JSON results format.

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::term::{vocab, Literal, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed SPARQL results: {0}")]
pub struct MalformedResults(pub String);

/// Variable bindings in evaluation order. A cell is `None` only for an
/// aggregate over no usable input.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolutionTable {
    pub vars: Vec<String>,
    pub rows: Vec<Vec<Option<Term>>>,
}

impl SolutionTable {
    pub fn new(vars: Vec<String>) -> SolutionTable {
        SolutionTable { vars, rows: Vec::new() }
    }

    pub fn column(&self, var: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == var)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }
}

pub fn term_to_json(term: &Term) -> Value {
    match term {
        Term::Iri(iri) => json!({"type": "uri", "value": iri}),
        Term::BNode(label) => json!({"type": "bnode", "value": label}),
        Term::Literal(l) => {
            let mut obj = Map::new();
            obj.insert("type".into(), "literal".into());
            obj.insert("value".into(), l.lexical.clone().into());
            if let Some(lang) = &l.language {
                obj.insert("xml:lang".into(), lang.clone().into());
            } else if l.datatype != vocab::XSD_STRING {
                obj.insert("datatype".into(), l.datatype.clone().into());
            }
            Value::Object(obj)
        }
    }
}

pub fn term_from_json(value: &Value) -> Result<Term, MalformedResults> {
    let bad = |why: &str| MalformedResults(why.to_string());
    let obj = value.as_object().ok_or_else(|| bad("binding is not an object"))?;
    let field = |name: &str| obj.get(name).and_then(Value::as_str);
    let lexical = field("value").ok_or_else(|| bad("binding has no string `value`"))?;
    match field("type").ok_or_else(|| bad("binding has no `type`"))? {
        "uri" => Ok(Term::iri(lexical)),
        "bnode" => Ok(Term::BNode(lexical.to_string())),
        "literal" | "typed-literal" => Ok(Term::Literal(match (field("xml:lang"), field("datatype")) {
            (Some(lang), _) => Literal::lang(lexical, lang),
            (None, Some(dt)) => Literal::typed(lexical, dt),
            (None, None) => Literal::string(lexical),
        })),
        other => Err(MalformedResults(format!("unknown term type `{other}`"))),
    }
}

/// Renders a table as an `application/sparql-results+json` document.
pub fn to_sparql_json(table: &SolutionTable) -> Value {
    let bindings: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (var, cell) in table.vars.iter().zip(row) {
                if let Some(term) = cell {
                    obj.insert(var.clone(), term_to_json(term));
                }
            }
            Value::Object(obj)
        })
        .collect();
    json!({"head": {"vars": table.vars}, "results": {"bindings": bindings}})
}

pub fn from_sparql_json(doc: &Value) -> Result<SolutionTable, MalformedResults> {
    let bad = |why: &str| MalformedResults(why.to_string());
    let vars = doc
        .pointer("/head/vars")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing head.vars"))?
        .iter()
        .map(|v| v.as_str().map(str::to_string).ok_or_else(|| bad("head.vars entries must be strings")))
        .collect::<Result<Vec<_>, _>>()?;
    let bindings = doc
        .pointer("/results/bindings")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing results.bindings"))?;
    let mut table = SolutionTable::new(vars);
    for binding in bindings {
        let obj = binding.as_object().ok_or_else(|| bad("solution is not an object"))?;
        if let Some(unknown) = obj.keys().find(|k| !table.vars.contains(k)) {
            return Err(MalformedResults(format!("binding for undeclared variable `{unknown}`")));
        }
        let row = table
            .vars
            .iter()
            .map(|var| obj.get(var).map(term_from_json).transpose())
            .collect::<Result<Vec<_>, _>>()?;
        table.rows.push(row);
    }
    Ok(table)
}

pub fn parse_sparql_json(text: &str) -> Result<SolutionTable, MalformedResults> {
    let doc: Value = serde_json::from_str(text).map_err(|e| MalformedResults(e.to_string()))?;
    from_sparql_json(&doc)
}
