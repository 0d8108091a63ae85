use std::process::ExitCode;

use clap::Parser;
use sparql_rest_gateway::{build, server, Args};
use tracing_subscriber::EnvFilter;

#[tokio::main]
async fn main() -> ExitCode {
    let config = match Args::parse().resolve() {
        Ok(config) => config,
        Err(e) => {
            eprintln!("sparql-rest: {e}");
            return ExitCode::from(2);
        }
    };
    let filter = EnvFilter::try_new(&config.log_level).unwrap_or_else(|_| EnvFilter::new("info"));
    tracing_subscriber::fmt().with_env_filter(filter).init();

    let service = match build(&config) {
        Ok(service) => service,
        Err(e) => {
            eprintln!("sparql-rest: {e}");
            return ExitCode::FAILURE;
        }
    };
    let listener = match tokio::net::TcpListener::bind(config.listen).await {
        Ok(listener) => listener,
        Err(e) => {
            eprintln!("sparql-rest: cannot listen on {}: {e}", config.listen);
            return ExitCode::FAILURE;
        }
    };
    tracing::info!(listen = %config.listen, "serving");
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    if let Err(e) = axum::serve(listener, server::router(service.gateway)).with_graceful_shutdown(shutdown).await {
        eprintln!("sparql-rest: {e}");
        return ExitCode::FAILURE;
    }
    if let (Some(path), Some(store)) = (&config.dump, &service.store) {
        let text = store.read().expect("store lock poisoned").dump_ntriples();
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("sparql-rest: cannot write {}: {e}", path.display());
            return ExitCode::FAILURE;
        }
    }
    ExitCode::SUCCESS
}
