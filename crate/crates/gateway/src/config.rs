//! Command line, `SPA_*` environment and TOML file configuration.
//! Precedence: flag, then environment, then file, then built-in default.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::Parser;
use serde::Deserialize;
use sparql_rest::namespace::is_absolute_iri;
use sparql_rest::query::DEFAULT_MAX_LIMIT;
use thiserror::Error;

use crate::endpoint::{Auth, EndpointConfig};

pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";
pub const DEFAULT_BASE: &str = "http://example.org/";
pub const DEFAULT_TIMEOUT_SECS: u64 = 30;

#[derive(Debug, Clone, Default, PartialEq, Eq, Parser, Deserialize)]
#[command(name = "sparql-rest", version, about = "Path-based JSON REST API over a SPARQL endpoint")]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Args {
    /// Address to listen on.
    #[arg(long, env = "SPA_LISTEN")]
    pub listen: Option<String>,
    /// SPARQL query endpoint URL.
    #[arg(long, env = "SPA_ENDPOINT")]
    pub endpoint: Option<String>,
    /// SPARQL update endpoint URL; defaults to the query endpoint.
    #[arg(long, env = "SPA_UPDATE_ENDPOINT")]
    pub update_endpoint: Option<String>,
    /// Serve an in-memory store loaded from this N-Triples file.
    #[arg(long, env = "SPA_EMBEDDED")]
    pub embedded: Option<PathBuf>,
    /// Prefix file (`prefix<TAB>namespace` per line), merged over the defaults.
    #[arg(long, env = "SPA_PREFIXES")]
    pub prefixes: Option<PathBuf>,
    /// Namespace for minted resource ids.
    #[arg(long, env = "SPA_BASE")]
    pub base: Option<String>,
    /// Cap on result rows per query.
    #[arg(long, env = "SPA_MAX_LIMIT")]
    pub max_limit: Option<u64>,
    /// Log filter, e.g. `info` or `debug`.
    #[arg(long, env = "SPA_LOG_LEVEL")]
    pub log_level: Option<String>,
    /// Upstream request timeout in seconds.
    #[arg(long, env = "SPA_TIMEOUT_SECS")]
    pub timeout_secs: Option<u64>,
    /// Bearer token sent to the upstream endpoint.
    #[arg(long, env = "SPA_AUTH_BEARER")]
    pub auth_bearer: Option<String>,
    /// `user:password` for basic auth against the upstream endpoint.
    #[arg(long, env = "SPA_AUTH_BASIC")]
    pub auth_basic: Option<String>,
    /// Write the embedded store to this N-Triples file on shutdown.
    #[arg(long, env = "SPA_DUMP")]
    pub dump: Option<PathBuf>,
    /// Seed for reproducible minted ids.
    #[arg(long, env = "SPA_MINT_SEED")]
    pub mint_seed: Option<u64>,
    /// TOML file with the same keys as the long flags.
    #[arg(long, env = "SPA_CONFIG")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {message}")]
    File { path: String, message: String },
    #[error("exactly one of --endpoint or --embedded is required")]
    Backend,
    #[error("--update-endpoint requires --endpoint")]
    UpdateWithoutQuery,
    #[error("invalid listen address `{0}`")]
    Listen(String),
    #[error("`{0}` is not an absolute http(s) URL")]
    Url(String),
    #[error("`{0}` is not an absolute IRI")]
    Base(String),
    #[error("{0} must be greater than zero")]
    Zero(&'static str),
    #[error("--auth-bearer and --auth-basic are mutually exclusive")]
    Auth,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    Remote(EndpointConfig),
    Embedded(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GatewayConfig {
    pub listen: SocketAddr,
    pub backend: Backend,
    pub prefixes: Option<PathBuf>,
    pub base: String,
    pub max_limit: u64,
    pub log_level: String,
    pub dump: Option<PathBuf>,
    pub mint_seed: Option<u64>,
}

macro_rules! fill {
    ($dst:ident, $src:ident; $($field:ident),*) => {
        $(if $dst.$field.is_none() { $dst.$field = $src.$field; })*
    };
}

impl Args {
    /// Fields still unset are taken from `file`.
    pub fn or_file(mut self, file: Args) -> Args {
        fill!(self, file; listen, endpoint, update_endpoint, embedded, prefixes, base, max_limit,
              log_level, timeout_secs, auth_bearer, auth_basic, dump, mint_seed);
        self
    }

    pub fn load_file(path: &Path) -> Result<Args, ConfigError> {
        let err = |message: String| ConfigError::File { path: path.display().to_string(), message };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        toml::from_str(&text).map_err(|e| err(e.to_string()))
    }

    pub fn resolve(self) -> Result<GatewayConfig, ConfigError> {
        let args = match &self.config {
            Some(path) => {
                let file = Args::load_file(path)?;
                self.or_file(file)
            }
            None => self,
        };
        args.validate()
    }

    fn validate(self) -> Result<GatewayConfig, ConfigError> {
        let listen_text = self.listen.unwrap_or_else(|| DEFAULT_LISTEN.to_string());
        let listen: SocketAddr = listen_text.parse().map_err(|_| ConfigError::Listen(listen_text.clone()))?;
        let timeout = self.timeout_secs.unwrap_or(DEFAULT_TIMEOUT_SECS);
        if timeout == 0 {
            return Err(ConfigError::Zero("--timeout-secs"));
        }
        let auth = match (self.auth_bearer, self.auth_basic) {
            (Some(_), Some(_)) => return Err(ConfigError::Auth),
            (Some(token), None) => Some(Auth::Bearer(token)),
            (None, Some(pair)) => Some(match pair.split_once(':') {
                Some((user, password)) => Auth::Basic { user: user.into(), password: Some(password.into()) },
                None => Auth::Basic { user: pair, password: None },
            }),
            (None, None) => None,
        };
        let backend = match (self.endpoint, self.embedded) {
            (Some(query_url), None) => {
                let update_url = self.update_endpoint.unwrap_or_else(|| query_url.clone());
                for url in [&query_url, &update_url] {
                    if !is_http_url(url) {
                        return Err(ConfigError::Url(url.clone()));
                    }
                }
                Backend::Remote(EndpointConfig { query_url, update_url, timeout: Duration::from_secs(timeout), auth })
            }
            (None, Some(file)) if self.update_endpoint.is_none() => Backend::Embedded(file),
            (None, Some(_)) => return Err(ConfigError::UpdateWithoutQuery),
            _ => return Err(ConfigError::Backend),
        };
        let base = self.base.unwrap_or_else(|| DEFAULT_BASE.to_string());
        if !is_absolute_iri(&base) {
            return Err(ConfigError::Base(base));
        }
        let max_limit = self.max_limit.unwrap_or(DEFAULT_MAX_LIMIT);
        if max_limit == 0 {
            return Err(ConfigError::Zero("--max-limit"));
        }
        Ok(GatewayConfig {
            listen,
            backend,
            prefixes: self.prefixes,
            base,
            max_limit,
            log_level: self.log_level.unwrap_or_else(|| "info".to_string()),
            dump: self.dump,
            mint_seed: self.mint_seed,
        })
    }
}

fn is_http_url(url: &str) -> bool {
    reqwest::Url::parse(url).is_ok_and(|u| matches!(u.scheme(), "http" | "https") && u.has_host())
}
