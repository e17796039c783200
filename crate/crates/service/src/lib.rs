//! Voice-messaging service: stores conversations and voice messages, augments
//! each upload in the background and serves the REST + WebSocket API.

use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use speejis_core::{BackendConfig, BackendKind, EmojiTable, HttpTranscriber, Pipeline, PipelineConfig, Transcriber};
use tokio::net::TcpListener;

mod api;
pub mod error;
pub mod model;
pub mod store;
pub mod worker;

pub use api::{DEFAULT_SVG_HEIGHT, DEFAULT_SVG_WIDTH, MAX_UPLOAD_BYTES};
pub use error::ServiceError;
pub use model::{Conversation, Event, EventType, MessageStatus, VoiceMessage};
pub use worker::DEFAULT_WORKERS;

pub const MAX_DURATION_S: f64 = 300.0;
pub const DRAIN_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub ser: BackendConfig,
    /// Transcription endpoint; shares timeout and retry policy with `ser`.
    pub asr_url: Option<String>,
    /// Emoji table file; the built-in table when absent.
    pub table: Option<PathBuf>,
    pub pipeline: PipelineConfig,
    pub workers: usize,
    pub max_duration_s: f64,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            data_dir: data_dir.into(),
            ser: BackendConfig::default(),
            asr_url: None,
            table: None,
            pipeline: PipelineConfig::default(),
            workers: DEFAULT_WORKERS,
            max_duration_s: MAX_DURATION_S,
        }
    }
}

pub struct Service {
    state: Arc<api::AppState>,
}

impl Service {
    /// Loads the table, builds backends, recovers the store and resumes any
    /// augmentation interrupted by the previous shutdown.
    pub fn open(cfg: &ServiceConfig) -> Result<Service, ServiceError> {
        let table = match &cfg.table {
            Some(path) => EmojiTable::load(path)?,
            None => EmojiTable::builtin(),
        };
        cfg.ser.validate()?;
        let ser = cfg.ser.build_ser()?;
        let asr = match &cfg.asr_url {
            Some(url) => {
                let asr_cfg = BackendConfig {
                    kind: BackendKind::External,
                    endpoint_url: Some(url.clone()),
                    ..cfg.ser.clone()
                };
                Some(Arc::new(HttpTranscriber::new(&asr_cfg)?) as Arc<dyn Transcriber>)
            }
            None => None,
        };
        let pipeline = Arc::new(Pipeline::new(Arc::new(table), cfg.pipeline, ser, asr)?);

        let recovered = store::Store::open(&cfg.data_dir)?;
        let store = Arc::new(recovered.store);
        let workers = worker::Workers::new(store.clone(), pipeline, cfg.workers);
        if !recovered.pending.is_empty() {
            tracing::info!(count = recovered.pending.len(), "resuming interrupted augmentations");
        }
        for id in recovered.pending {
            workers.resume(id);
        }
        Ok(Service {
            state: Arc::new(api::AppState {
                store,
                workers,
                max_duration_s: cfg.max_duration_s,
            }),
        })
    }

    pub fn router(&self) -> axum::Router {
        api::router(self.state.clone())
    }

    pub fn store(&self) -> &store::Store {
        &self.state.store
    }

    pub fn workers(&self) -> &worker::Workers {
        &self.state.workers
    }

    /// Serves until `shutdown` resolves, then waits up to `drain` for
    /// in-flight augmentations.
    pub async fn run(
        self,
        listener: TcpListener,
        shutdown: impl Future<Output = ()>,
        drain: Duration,
    ) -> std::io::Result<()> {
        let server = axum::serve(listener, self.router());
        tokio::select! {
            r = server => r?,
            () = shutdown => tracing::info!("shutting down"),
        }
        self.state.workers.drain(drain).await;
        Ok(())
    }
}

/// Binds `host:port` (`0` for an ephemeral port).
pub async fn bind(host: &str, port: u16) -> std::io::Result<(TcpListener, SocketAddr)> {
    let listener = TcpListener::bind((host, port)).await?;
    let addr = listener.local_addr()?;
    Ok((listener, addr))
}
