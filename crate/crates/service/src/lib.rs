//! Play sessions against the drone swarm, served over HTTP.

pub mod config;
pub mod error;
pub mod http;
pub mod session;
pub mod store;

use std::sync::Arc;
use std::time::{Duration, Instant};

pub use config::{ConfigError, ServiceConfig};
pub use error::ServiceError;
pub use http::router;
pub use session::{FirstMover, Session, SessionConfig, SessionView, StrategyConfig};
pub use store::SessionStore;

/// Binds the configured address and serves until the process exits. Idle
/// sessions are swept once a minute.
pub async fn serve(cfg: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind((cfg.bind.as_str(), cfg.port)).await?;
    serve_on(listener, cfg).await
}

pub async fn serve_on(listener: tokio::net::TcpListener, cfg: ServiceConfig) -> std::io::Result<()> {
    let store = Arc::new(SessionStore::new(cfg));
    let sweeper = Arc::clone(&store);
    tokio::spawn(async move {
        let mut every = tokio::time::interval(Duration::from_secs(60));
        loop {
            every.tick().await;
            sweeper.expire_idle(Instant::now());
        }
    });
    axum::serve(listener, router(store)).await
}
