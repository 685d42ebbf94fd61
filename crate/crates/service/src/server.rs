use std::net::SocketAddr;
use std::sync::Arc;

use breaktimes_core::{load_catalog, Questionnaire, SessionOptions};
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

use crate::api::{router, AppState};
use crate::clock::{Clock, SystemClock};
use crate::config::ServiceConfig;
use crate::error::ServiceError;
use crate::store::SessionStore;
use crate::surveys::SurveyStore;

/// A running server. Dropping the handle without calling [`shutdown`]
/// leaves the server running until the runtime stops.
///
/// [`shutdown`]: ServiceHandle::shutdown
pub struct ServiceHandle {
    addr: SocketAddr,
    state: AppState,
    stop: Option<oneshot::Sender<()>>,
    task: JoinHandle<std::io::Result<()>>,
}

impl ServiceHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn state(&self) -> &AppState {
        &self.state
    }

    /// Stops accepting connections, drains in-flight requests and flushes
    /// every open journal.
    pub async fn shutdown(mut self) -> Result<(), ServiceError> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        self.wait().await
    }

    /// Waits until the server stops on its own (for example after the
    /// listener fails), then flushes.
    pub async fn wait(self) -> Result<(), ServiceError> {
        let served = self
            .task
            .await
            .map_err(|e| ServiceError::storage("joining the server task", std::io::Error::other(e)))?;
        let store = self.state.store.clone();
        let flushed = tokio::task::spawn_blocking(move || store.flush_all())
            .await
            .map_err(|e| ServiceError::storage("flushing journals", std::io::Error::other(e)))?;
        served.map_err(ServiceError::Bind)?;
        flushed
    }
}

/// Loads content, recovers persisted sessions, binds the port and starts
/// serving in the background.
pub async fn serve(config: ServiceConfig) -> Result<ServiceHandle, ServiceError> {
    serve_with_clock(config, Arc::new(SystemClock)).await
}

pub async fn serve_with_clock(config: ServiceConfig, clock: Arc<dyn Clock>) -> Result<ServiceHandle, ServiceError> {
    let state = build_state(&config, clock)?;
    let listener = TcpListener::bind(("0.0.0.0", config.port)).await.map_err(|e| match e.kind() {
        std::io::ErrorKind::AddrInUse => ServiceError::PortInUse(config.port),
        _ => ServiceError::Bind(e),
    })?;
    let addr = listener.local_addr().map_err(ServiceError::Bind)?;
    tracing::info!(%addr, scenarios = state.catalog.len(), "serving");

    let (stop, stopped) = oneshot::channel::<()>();
    let app = router(state.clone());
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = stopped.await;
            })
            .await
    });
    Ok(ServiceHandle { addr, state, stop: Some(stop), task })
}

/// Everything the router needs, without binding a socket.
pub fn build_state(config: &ServiceConfig, clock: Arc<dyn Clock>) -> Result<AppState, ServiceError> {
    config.prepare_data_dir()?;
    let catalog = Arc::new(load_catalog(&config.scenario_dir)?);
    let questionnaire = match &config.questionnaire {
        Some(path) => Questionnaire::load(path)?,
        None => Questionnaire::stock(),
    };
    let options = SessionOptions { auto_finish_on_alert: config.auto_finish_on_alert };
    let store = SessionStore::open(&config.data_dir, catalog.clone(), clock.clone(), options)?;
    let surveys = SurveyStore::open(&config.data_dir)?;
    Ok(AppState {
        catalog,
        scenario_dir: config.scenario_dir.clone(),
        store: Arc::new(store),
        surveys: Arc::new(surveys),
        questionnaire: Arc::new(questionnaire),
        clock,
    })
}
