//! Emotion and transcription backends.
//!
//! The pipeline talks to backends through [`SerBackend`] and [`Transcriber`].
//! [`BaselineBackend`] is a deterministic, offline acoustic stand-in; the HTTP
//! clients in [`external`] speak the JSON wire protocol described in
//! [`wire`].

mod align;
mod baseline;
pub mod external;
pub mod wire;

use std::fmt;
use std::sync::Arc;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::{AudioClip, ChunkSpan};
use crate::emotion::VadPoint;
use crate::error::{Error, Result};
use crate::json::fixed6;

pub use align::{align, align_text};
pub use baseline::{baseline_analyze, baseline_from_features, BaselineBackend};
pub use external::{HttpSerBackend, HttpTranscriber};

/// Half-open time interval in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSpan {
    pub start_s: f64,
    pub end_s: f64,
}

impl TimeSpan {
    pub fn new(start_s: f64, end_s: f64) -> Self {
        TimeSpan { start_s, end_s }
    }

    /// Length of the intersection with `[start_s, end_s)`; zero when disjoint.
    pub fn overlap_s(&self, start_s: f64, end_s: f64) -> f64 {
        (self.end_s.min(end_s) - self.start_s.max(start_s)).max(0.0)
    }
}

impl From<ChunkSpan> for TimeSpan {
    fn from(s: ChunkSpan) -> Self {
        TimeSpan::new(s.start_s, s.end_s)
    }
}

impl From<&ChunkSpan> for TimeSpan {
    fn from(s: &ChunkSpan) -> Self {
        TimeSpan::new(s.start_s, s.end_s)
    }
}

/// One timed piece of transcript text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptSegment {
    #[serde(serialize_with = "fixed6")]
    pub start_s: f64,
    #[serde(serialize_with = "fixed6")]
    pub end_s: f64,
    pub text: String,
}

impl TranscriptSegment {
    pub fn new(start_s: f64, end_s: f64, text: impl Into<String>) -> Self {
        TranscriptSegment {
            start_s,
            end_s,
            text: text.into(),
        }
    }
}

/// Checks that segments are well-formed, ordered and non-overlapping.
pub fn validate_transcript(segments: &[TranscriptSegment]) -> std::result::Result<(), String> {
    let mut prev_end = 0.0f64;
    for (i, s) in segments.iter().enumerate() {
        if !s.start_s.is_finite() || !s.end_s.is_finite() || s.start_s < 0.0 || s.start_s >= s.end_s {
            return Err(format!("segment {i} has invalid bounds ({}, {})", s.start_s, s.end_s));
        }
        if s.start_s < prev_end {
            return Err(format!("segment {i} overlaps or precedes its predecessor"));
        }
        prev_end = s.end_s;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendErrorKind {
    Timeout,
    Connect,
    /// Non-success HTTP status.
    Http,
    /// Unparseable body, wrong arity or bad ordering.
    Malformed,
    OutOfRange,
}

impl fmt::Display for BackendErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendErrorKind::Timeout => "timeout",
            BackendErrorKind::Connect => "connection failed",
            BackendErrorKind::Http => "http error",
            BackendErrorKind::Malformed => "malformed response",
            BackendErrorKind::OutOfRange => "out-of-range values",
        })
    }
}

/// Failure of a backend call, with the indices of the requested spans it
/// affects.
#[derive(Debug, Clone, Error)]
#[error("{kind}: {message} (spans {spans:?})")]
pub struct BackendError {
    pub kind: BackendErrorKind,
    pub spans: Vec<usize>,
    pub message: String,
}

impl BackendError {
    pub fn new(kind: BackendErrorKind, spans: Vec<usize>, message: impl Into<String>) -> Self {
        BackendError {
            kind,
            spans,
            message: message.into(),
        }
    }

    /// Whether another attempt may succeed.
    pub fn is_transient(&self) -> bool {
        matches!(
            self.kind,
            BackendErrorKind::Timeout | BackendErrorKind::Connect | BackendErrorKind::Http
        )
    }
}

/// Speech emotion recognition over a set of spans of one clip.
///
/// Implementations return exactly one point per requested span, in request
/// order. A span covering the whole clip is an independent inference, never a
/// combination of the others.
#[async_trait]
pub trait SerBackend: Send + Sync {
    async fn analyze(&self, clip: &AudioClip, spans: &[TimeSpan]) -> Result<Vec<VadPoint>, BackendError>;
}

#[async_trait]
pub trait Transcriber: Send + Sync {
    async fn transcribe(&self, clip: &AudioClip) -> Result<Vec<TranscriptSegment>, BackendError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackendKind {
    #[default]
    Baseline,
    External,
}

impl std::str::FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(BackendKind::Baseline),
            "external" => Ok(BackendKind::External),
            other => Err(Error::Input(format!("unknown backend kind `{other}`"))),
        }
    }
}

pub const DEFAULT_TIMEOUT_S: f64 = 30.0;
pub const DEFAULT_RETRY_COUNT: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Base URL; `/analyze` or `/transcribe` is appended.
    pub endpoint_url: Option<String>,
    pub timeout_s: f64,
    pub retry_count: u32,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Baseline,
            endpoint_url: None,
            timeout_s: DEFAULT_TIMEOUT_S,
            retry_count: DEFAULT_RETRY_COUNT,
        }
    }
}

impl BackendConfig {
    pub fn external(url: impl Into<String>) -> Self {
        BackendConfig {
            kind: BackendKind::External,
            endpoint_url: Some(url.into()),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.timeout_s.is_finite() && self.timeout_s > 0.0) {
            return Err(Error::Input(format!(
                "timeout must be positive, got {}",
                self.timeout_s
            )));
        }
        if self.kind == BackendKind::External && self.endpoint_url.as_deref().is_none_or(str::is_empty) {
            return Err(Error::Input("external backend requires an endpoint URL".into()));
        }
        Ok(())
    }

    /// Instantiates the SER backend this config describes.
    pub fn build_ser(&self) -> Result<Arc<dyn SerBackend>> {
        self.validate()?;
        Ok(match self.kind {
            BackendKind::Baseline => Arc::new(BaselineBackend),
            BackendKind::External => Arc::new(HttpSerBackend::new(self)?),
        })
    }
}
