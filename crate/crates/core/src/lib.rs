//! Path-based JSON views over SPARQL endpoints.
//!
//! A request path such as `/api/class/dbo:Country/dbr:Germany/dbo:capital`
//! is parsed into an [`ApiPath`](path::ApiPath), compiled into a
//! [`QueryPlan`](query::QueryPlan) (or an [`UpdatePlan`](update::UpdatePlan)
//! for writes), serialized to SPARQL, and the resulting bindings are shaped
//! into nested `ids` / `values` / `id-map` / `value-map` JSON.
//!
//! [`engine`] holds an in-memory triple store that evaluates plans directly;
//! it backs the embedded mode and serves as the test oracle.

pub mod engine;
pub mod namespace;
pub mod path;
pub mod query;
pub mod results;
pub mod shape;
pub mod sparql;
pub mod term;
pub mod update;

pub use namespace::{IdToken, NamespaceError, PrefixMap};
pub use path::ApiPath;
pub use term::{Literal, Term, Triple};
