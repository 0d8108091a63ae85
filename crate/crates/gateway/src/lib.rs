//! HTTP gateway exposing a SPARQL endpoint through path-based JSON CRUD.

pub mod api;
pub mod batch;
pub mod config;
pub mod endpoint;
pub mod error;
pub mod mint;
pub mod server;
pub mod sparql_server;

use std::sync::{Arc, RwLock};

use sparql_rest::engine::{NTriplesError, TripleStore};
use sparql_rest::query::CompileOptions;
use sparql_rest::{NamespaceError, PrefixMap};
use thiserror::Error;

pub use api::{ApiResponse, Gateway};
pub use config::{Args, Backend, GatewayConfig};
pub use endpoint::{Embedded, Endpoint, EndpointConfig, EndpointError, RemoteHttp};
pub use error::{ApiError, ErrorCode};
pub use mint::IdMinter;

#[derive(Debug, Error)]
pub enum StartupError {
    #[error(transparent)]
    Prefixes(#[from] NamespaceError),
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("{path}: {source}")]
    NTriples { path: String, source: NTriplesError },
    #[error(transparent)]
    Endpoint(#[from] EndpointError),
}

/// A gateway plus the store behind it in embedded mode.
pub struct Service {
    pub gateway: Arc<Gateway>,
    pub store: Option<Arc<RwLock<TripleStore>>>,
}

pub fn build(config: &GatewayConfig) -> Result<Service, StartupError> {
    let prefixes = match &config.prefixes {
        Some(path) => PrefixMap::with_defaults().merged(&PrefixMap::load_prefix_file(path)?),
        None => PrefixMap::with_defaults(),
    };
    let (endpoint, store): (Arc<dyn Endpoint>, _) = match &config.backend {
        Backend::Remote(endpoint) => (Arc::new(RemoteHttp::new(endpoint.clone())?), None),
        Backend::Embedded(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| StartupError::Read { path: path.display().to_string(), message: e.to_string() })?;
            let mut store = TripleStore::new();
            store
                .load_ntriples(&text)
                .map_err(|source| StartupError::NTriples { path: path.display().to_string(), source })?;
            let embedded = Embedded::new(store);
            let store = embedded.store();
            (Arc::new(embedded), Some(store))
        }
    };
    let minter = match config.mint_seed {
        Some(seed) => IdMinter::seeded(config.base.clone(), seed),
        None => IdMinter::random(config.base.clone()),
    };
    let options = CompileOptions { max_limit: config.max_limit };
    Ok(Service { gateway: Arc::new(Gateway::new(prefixes, endpoint, minter, options)), store })
}
