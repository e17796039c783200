use std::sync::Arc;
use std::time::Duration;

use speejis_core::{decode_wav, AudioClip, Pipeline};
use tokio::sync::Semaphore;
use tokio_util::task::TaskTracker;

use crate::store::Store;

pub const DEFAULT_WORKERS: usize = 4;

/// Runs augmentation jobs off the request path, at most `workers` at a time.
#[derive(Clone)]
pub struct Workers {
    store: Arc<Store>,
    pipeline: Arc<Pipeline>,
    permits: Arc<Semaphore>,
    tracker: TaskTracker,
}

impl Workers {
    pub fn new(store: Arc<Store>, pipeline: Arc<Pipeline>, workers: usize) -> Self {
        Workers {
            store,
            pipeline,
            permits: Arc::new(Semaphore::new(workers.max(1))),
            tracker: TaskTracker::new(),
        }
    }

    pub fn enqueue(&self, message_id: String, clip: AudioClip) {
        let this = self.clone();
        self.tracker.spawn(async move {
            let Ok(_permit) = this.permits.clone().acquire_owned().await else {
                return;
            };
            let descriptor = this.pipeline.augment(&message_id, &clip).await;
            if let Err(e) = this.store.record_augmented(&message_id, descriptor).await {
                tracing::error!(message_id, error = %e, "could not persist descriptor");
            }
        });
    }

    /// Re-runs a job whose audio is already stored.
    pub fn resume(&self, message_id: String) {
        let clip = self
            .store
            .message(&message_id)
            .and_then(|m| Ok(self.store.read_audio(&m.audio_ref)?))
            .and_then(|bytes| Ok(decode_wav(&bytes)?));
        match clip {
            Ok(clip) => self.enqueue(message_id, clip),
            Err(e) => tracing::error!(message_id, error = %e, "cannot resume augmentation"),
        }
    }

    pub fn in_flight(&self) -> usize {
        self.tracker.len()
    }

    /// Waits up to `timeout` for running jobs. Returns whether all finished;
    /// unfinished ones stay `processing` and are resumed on next start.
    pub async fn drain(&self, timeout: Duration) -> bool {
        self.tracker.close();
        let done = tokio::time::timeout(timeout, self.tracker.wait()).await.is_ok();
        if !done {
            tracing::warn!(remaining = self.tracker.len(), "drain timed out");
        }
        done
    }
}
