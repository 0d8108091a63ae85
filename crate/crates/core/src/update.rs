//! Compiles POST / PUT / DELETE requests into update plans.
//!
//! Request bodies use the GET result shape: `id-map` keyed by property, each
//! entry listing the objects as `ids` and `values`. An `id-map` nested inside
//! a property entry describes a freshly minted intermediate resource.

use serde_json::{Map, Value};
use thiserror::Error;

use crate::namespace::{IdToken, NamespaceError, PrefixMap};
use crate::path::{ApiPath, ClassRef, EntryPoint, PropRef, Segment};
use crate::query::{expand_res, PatternTerm, Predicate, TriplePattern, Variable};
use crate::term::{vocab, Literal, Term, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BodyError {
    #[error("malformed body: {0}")]
    MalformedBody(String),
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("invalid value object: {0}")]
    InvalidValueObject(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UpdateError {
    #[error(transparent)]
    Body(#[from] BodyError),
    #[error(transparent)]
    Namespace(#[from] NamespaceError),
    #[error("POST is only accepted on /class/<class> or /resource")]
    PostTargetTooDeep,
    #[error("POST needs a concrete class")]
    PostOnWildcard,
    #[error("PUT targets must not contain wildcards")]
    PutOnWildcard,
    #[error("PUT targets must not contain property paths")]
    PutWithPropertyPath,
    #[error("PUT targets a resource, not a property")]
    PutOnPropTerminal,
    #[error("PUT needs a resource to update")]
    PutWithoutTarget,
    #[error("DELETE targets must not contain wildcards")]
    DeleteOnWildcard,
    #[error("DELETE targets must not contain property paths")]
    DeleteWithPropertyPath,
    #[error("DELETE depth must be 1, 2 or 3, got {0}")]
    DepthOutOfRange(usize),
    #[error("a literal cannot be the subject of a triple")]
    LiteralSubject,
    #[error("RQL modifiers are only accepted on GET")]
    RqlNotAllowed,
    #[error("`/namespace` is read-only")]
    ReadOnlyEntry,
}

/// A value object before prefix expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueSpec {
    pub value: String,
    pub language: Option<String>,
    /// Always present after parsing: `xsd:string` or `rdf:langString` by default.
    pub datatype: IdToken,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BodyObject {
    pub ids: Vec<IdToken>,
    pub values: Vec<ValueSpec>,
    /// Entries in key order.
    pub id_map: Vec<(IdToken, BodyObject)>,
}

impl BodyObject {
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty() && self.values.is_empty() && self.id_map.is_empty()
    }
}

/// Parses a raw request body. An empty or all-whitespace body is `{}`.
pub fn parse_body_text(text: &str) -> Result<BodyObject, BodyError> {
    if text.trim().is_empty() {
        return Ok(BodyObject::default());
    }
    let json: Value = serde_json::from_str(text).map_err(|e| BodyError::MalformedBody(e.to_string()))?;
    parse_body(&json)
}

pub fn parse_body(json: &Value) -> Result<BodyObject, BodyError> {
    let Value::Object(object) = json else {
        return Err(BodyError::MalformedBody("expected a JSON object".into()));
    };
    parse_node(object)
}

fn parse_node(object: &Map<String, Value>) -> Result<BodyObject, BodyError> {
    let mut node = BodyObject::default();
    for (key, value) in object {
        match key.as_str() {
            "ids" => {
                for item in as_array(key, value)? {
                    let Value::String(s) = item else {
                        return Err(BodyError::MalformedBody("`ids` entries must be strings".into()));
                    };
                    node.ids.push(parse_id(s)?);
                }
            }
            "values" => {
                for item in as_array(key, value)? {
                    node.values.push(parse_value_object(item)?);
                }
            }
            "id-map" => {
                let Value::Object(map) = value else {
                    return Err(BodyError::MalformedBody("`id-map` must be an object".into()));
                };
                for (k, v) in map {
                    let Value::Object(child) = v else {
                        return Err(BodyError::MalformedBody(format!("`id-map` entry `{k}` must be an object")));
                    };
                    node.id_map.push((parse_id(k)?, parse_node(child)?));
                }
            }
            "value-map" => {
                return Err(BodyError::MalformedBody("`value-map` cannot be written; literals have no properties".into()))
            }
            other => return Err(BodyError::UnknownField(other.to_string())),
        }
    }
    Ok(node)
}

fn as_array<'a>(key: &str, value: &'a Value) -> Result<&'a Vec<Value>, BodyError> {
    value
        .as_array()
        .ok_or_else(|| BodyError::MalformedBody(format!("`{key}` must be an array")))
}

fn parse_id(s: &str) -> Result<IdToken, BodyError> {
    IdToken::parse(s).map_err(|e| BodyError::MalformedBody(e.to_string()))
}

pub fn parse_value_object(item: &Value) -> Result<ValueSpec, BodyError> {
    let Value::Object(obj) = item else {
        return Err(BodyError::InvalidValueObject("expected an object".into()));
    };
    let mut value = None;
    let mut language = None;
    let mut datatype = None;
    for (key, v) in obj {
        let Value::String(s) = v else {
            return Err(BodyError::InvalidValueObject(format!("`{key}` must be a string")));
        };
        match key.as_str() {
            "value" => value = Some(s.clone()),
            "language" => language = Some(s.clone()),
            "datatype" => datatype = Some(IdToken::parse(s).map_err(|e| BodyError::InvalidValueObject(e.to_string()))?),
            other => return Err(BodyError::UnknownField(other.to_string())),
        }
    }
    let value = value.ok_or_else(|| BodyError::InvalidValueObject("missing `value`".into()))?;
    if let Some(lang) = &language {
        if !crate::path::is_language_tag(lang) {
            return Err(BodyError::InvalidValueObject(format!("`{lang}` is not a language tag")));
        }
    }
    let datatype = match (&language, datatype) {
        (Some(_), None) => IdToken::Iri(vocab::RDF_LANG_STRING.into()),
        (None, None) => IdToken::Iri(vocab::XSD_STRING.into()),
        (_, Some(dt)) => dt,
    };
    Ok(ValueSpec { value, language, datatype })
}

fn literal_from_spec(spec: &ValueSpec, prefixes: &PrefixMap) -> Result<Literal, UpdateError> {
    let datatype = match prefixes.expand_token(&spec.datatype)? {
        Term::Iri(iri) => iri,
        _ => return Err(BodyError::InvalidValueObject("datatype must be an IRI".into()).into()),
    };
    match (&spec.language, datatype == vocab::RDF_LANG_STRING) {
        (Some(lang), true) => Ok(Literal::lang(spec.value.clone(), lang.clone())),
        (None, false) => Ok(Literal::typed(spec.value.clone(), datatype)),
        (Some(_), false) => Err(BodyError::InvalidValueObject("a language tag requires datatype rdf:langString".into()).into()),
        (None, true) => Err(BodyError::InvalidValueObject("rdf:langString requires a language tag".into()).into()),
    }
}

/// A delete pattern: subject and object are terms or variables, the
/// predicate is an IRI or a variable.
pub type DeletePattern = TriplePattern;

/// Deletes run before inserts, in one request.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UpdatePlan {
    pub deletes: Vec<DeletePattern>,
    pub inserts: Vec<Triple>,
}

impl UpdatePlan {
    pub fn is_empty(&self) -> bool {
        self.deletes.is_empty() && self.inserts.is_empty()
    }

    fn insert(&mut self, triple: Triple) {
        if !self.inserts.contains(&triple) {
            self.inserts.push(triple);
        }
    }
}

/// Source of fresh resource identifiers.
pub trait Minter {
    fn mint(&mut self) -> Term;
}

impl<F: FnMut() -> Term> Minter for F {
    fn mint(&mut self) -> Term {
        self()
    }
}

fn reject_modifiers(path: &ApiPath) -> Result<(), UpdateError> {
    if matches!(path.entry, EntryPoint::Namespace(_)) {
        return Err(UpdateError::ReadOnlyEntry);
    }
    if !path.rql.is_empty() {
        return Err(UpdateError::RqlNotAllowed);
    }
    Ok(())
}

/// Inserts the triples `body` describes about `subject`.
fn describe(
    plan: &mut UpdatePlan,
    subject: &Term,
    body: &BodyObject,
    minter: &mut dyn Minter,
    prefixes: &PrefixMap,
) -> Result<(), UpdateError> {
    if !body.ids.is_empty() || !body.values.is_empty() {
        return Err(BodyError::MalformedBody("an object body describes its properties under `id-map`".into()).into());
    }
    for (property, objects) in &body.id_map {
        let predicate = property_term(property, prefixes)?;
        add_objects(plan, subject, &predicate, objects, minter, prefixes)?;
    }
    Ok(())
}

fn property_term(property: &IdToken, prefixes: &PrefixMap) -> Result<Term, UpdateError> {
    match prefixes.expand_token(property)? {
        t @ Term::Iri(_) => Ok(t),
        _ => Err(BodyError::MalformedBody(format!("property `{property}` must be an IRI")).into()),
    }
}

fn add_objects(
    plan: &mut UpdatePlan,
    subject: &Term,
    predicate: &Term,
    objects: &BodyObject,
    minter: &mut dyn Minter,
    prefixes: &PrefixMap,
) -> Result<(), UpdateError> {
    for id in &objects.ids {
        plan.insert(Triple::new(subject.clone(), predicate.clone(), prefixes.expand_token(id)?));
    }
    for value in &objects.values {
        plan.insert(Triple::new(subject.clone(), predicate.clone(), Term::Literal(literal_from_spec(value, prefixes)?)));
    }
    if !objects.id_map.is_empty() {
        let nested = minter.mint();
        plan.insert(Triple::new(subject.clone(), predicate.clone(), nested.clone()));
        let inner = BodyObject { ids: Vec::new(), values: Vec::new(), id_map: objects.id_map.clone() };
        describe(plan, &nested, &inner, minter, prefixes)?;
    }
    Ok(())
}

/// Terms of a fully concrete path, RES positions as terms, PROP as IRIs.
fn concrete_segments(path: &ApiPath, prefixes: &PrefixMap) -> Result<Vec<Term>, UpdateError> {
    let mut out = Vec::with_capacity(path.segments.len());
    for segment in &path.segments {
        out.push(match segment {
            Segment::Res(res) => expand_res(res, prefixes)?.expect("wildcards rejected"),
            Segment::Prop(PropRef::Id(id)) => prefixes.expand_token(id)?,
            Segment::Prop(_) => unreachable!("wildcards and paths rejected"),
        });
    }
    Ok(out)
}

/// Class and chain triples implied by a concrete path.
fn path_implied(plan: &mut UpdatePlan, path: &ApiPath, terms: &[Term], prefixes: &PrefixMap) -> Result<(), UpdateError> {
    if let (EntryPoint::Class(ClassRef::Id(class)), Some(first)) = (&path.entry, terms.first()) {
        plan.insert(Triple::new(first.clone(), Term::Iri(vocab::RDF_TYPE.into()), prefixes.expand_token(class)?));
    }
    let mut i = 0;
    while i + 2 < terms.len() {
        plan.insert(Triple::new(terms[i].clone(), terms[i + 1].clone(), terms[i + 2].clone()));
        i += 2;
    }
    Ok(())
}

/// Compiles a POST. The top-level resource is minted first; nested id-maps
/// mint further resources in body order.
pub fn compile_post(
    path: &ApiPath,
    body: &BodyObject,
    minter: &mut dyn Minter,
    prefixes: &PrefixMap,
) -> Result<(UpdatePlan, Term), UpdateError> {
    reject_modifiers(path)?;
    if !path.segments.is_empty() {
        return Err(UpdateError::PostTargetTooDeep);
    }
    let class = match &path.entry {
        EntryPoint::Class(ClassRef::Wildcard) => return Err(UpdateError::PostOnWildcard),
        EntryPoint::Class(ClassRef::Id(id)) => Some(prefixes.expand_token(id)?),
        _ => None,
    };
    let minted = minter.mint();
    let mut plan = UpdatePlan::default();
    if let Some(class) = class {
        plan.insert(Triple::new(minted.clone(), Term::Iri(vocab::RDF_TYPE.into()), class));
    }
    describe(&mut plan, &minted, body, minter, prefixes)?;
    Ok((plan, minted))
}

/// Compiles a PUT: every property named in the body is replaced.
pub fn compile_put(
    path: &ApiPath,
    body: &BodyObject,
    minter: &mut dyn Minter,
    prefixes: &PrefixMap,
) -> Result<UpdatePlan, UpdateError> {
    reject_modifiers(path)?;
    if path.has_wildcard() {
        return Err(UpdateError::PutOnWildcard);
    }
    if path.has_property_path() {
        return Err(UpdateError::PutWithPropertyPath);
    }
    if path.segments.is_empty() {
        return Err(UpdateError::PutWithoutTarget);
    }
    if path.ends_with_prop() {
        return Err(UpdateError::PutOnPropTerminal);
    }
    let terms = concrete_segments(path, prefixes)?;
    let subject = terms.last().expect("non-empty").clone();
    if subject.is_literal() {
        return Err(UpdateError::LiteralSubject);
    }
    let mut plan = UpdatePlan::default();
    for (property, _) in &body.id_map {
        let predicate = property_term(property, prefixes)?;
        let pattern = TriplePattern {
            subject: PatternTerm::Term(subject.clone()),
            predicate: Predicate::Iri(predicate),
            object: PatternTerm::Var(Variable::new("o")),
        };
        if !plan.deletes.contains(&pattern) {
            plan.deletes.push(pattern);
        }
    }
    path_implied(&mut plan, path, &terms, prefixes)?;
    describe(&mut plan, &subject, body, minter, prefixes)?;
    Ok(plan)
}

/// Compiles a DELETE whose effect depends on the depth below the entry
/// point: 1 removes a resource, 2 a property, 3 a single triple.
pub fn compile_delete(path: &ApiPath, prefixes: &PrefixMap) -> Result<UpdatePlan, UpdateError> {
    reject_modifiers(path)?;
    if path.has_wildcard() {
        return Err(UpdateError::DeleteOnWildcard);
    }
    if path.has_property_path() {
        return Err(UpdateError::DeleteWithPropertyPath);
    }
    let depth = path.depth();
    if !(1..=3).contains(&depth) {
        return Err(UpdateError::DepthOutOfRange(depth));
    }
    let terms = concrete_segments(path, prefixes)?;
    if terms[0].is_literal() {
        return Err(UpdateError::LiteralSubject);
    }
    let term = |t: &Term| PatternTerm::Term(t.clone());
    let var = |name: &str| PatternTerm::Var(Variable::new(name));
    let deletes = match terms.as_slice() {
        [x] => vec![
            TriplePattern { subject: term(x), predicate: Predicate::Var(Variable::new("p")), object: var("o") },
            TriplePattern { subject: var("s"), predicate: Predicate::Var(Variable::new("p")), object: term(x) },
        ],
        [x, p] => vec![TriplePattern { subject: term(x), predicate: Predicate::Iri(p.clone()), object: var("o") }],
        [x, p, o] => vec![TriplePattern { subject: term(x), predicate: Predicate::Iri(p.clone()), object: term(o) }],
        _ => unreachable!("depth checked"),
    };
    Ok(UpdatePlan { deletes, inserts: Vec::new() })
}
