//! HTTP/JSON front end for a shared peerhol engine.
//!
//! Clients log in, run ProofScript and browse contexts and chronicles. No
//! route accepts a theorem, a context or a chronicle version as input:
//! everything that ends up in the store was produced by running a script.

pub mod accounts;
pub mod api;
pub mod config;
pub mod wire;

use std::sync::Arc;

pub use api::{router, AppState, RouteSpec, ROUTES};
pub use config::{ConfigError, ServiceConfig};

/// Serves the API on an already bound listener until ctrl-c.
pub async fn serve_on(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    if let Ok(addr) = listener.local_addr() {
        log::info!("listening on http://{addr}");
    }
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// Opens the configured store and serves the API.
pub async fn serve(config: ServiceConfig) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let cfg = config.clone();
    let engine = tokio::task::spawn_blocking(move || cfg.open_engine()).await??;
    let state = AppState::new(Arc::new(engine), config.session_idle());
    let listener = tokio::net::TcpListener::bind((config.bind.as_str(), config.port)).await?;
    serve_on(listener, state).await?;
    Ok(())
}
