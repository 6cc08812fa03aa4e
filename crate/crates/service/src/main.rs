use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use log::{error, info};
use meshsuggest_core::http::ReqwestTransport;
use meshsuggest_service::{router, AppState, ServiceConfig};

/// Usage: `meshsuggest-serve [CONFIG.json]`. `MESHSUGGEST_*` variables
/// override the file.
fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let file = std::env::args().nth(1);
    let config = match ServiceConfig::from_vars(|k| match (k, &file) {
        ("MESHSUGGEST_CONFIG", Some(f)) => Some(f.clone()),
        _ => std::env::var(k).ok(),
    }) {
        Ok(c) => c,
        Err(e) => {
            error!("{e}");
            return ExitCode::from(2);
        }
    };
    // Blocking client: built and dropped outside the async runtime.
    let transport = match ReqwestTransport::new(Duration::from_secs(60)) {
        Ok(t) => Arc::new(t),
        Err(e) => {
            error!("creating HTTP client: {e}");
            return ExitCode::FAILURE;
        }
    };
    let state = match AppState::new(config, transport) {
        Ok(s) => s,
        Err(e) => {
            error!("opening interaction log: {e}");
            return ExitCode::FAILURE;
        }
    };
    let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
    let code = runtime.block_on(serve(state.clone()));
    drop(runtime);
    drop(state);
    code
}

async fn serve(state: Arc<AppState>) -> ExitCode {
    let bind = state.config().bind.clone();
    let listener = match tokio::net::TcpListener::bind(&bind).await {
        Ok(l) => l,
        Err(e) => {
            error!("binding {bind}: {e}");
            return ExitCode::FAILURE;
        }
    };
    info!("listening on {bind}");
    let loader = state.clone();
    tokio::task::spawn_blocking(move || {
        let _ = loader.load();
    });
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    match axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
    {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::FAILURE
        }
    }
}
