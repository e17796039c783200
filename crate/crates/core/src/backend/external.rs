//! HTTP clients for remotely hosted SER and transcription models.

use std::time::Duration;

use async_trait::async_trait;
use serde::de::DeserializeOwned;

use super::wire::{AnalyzeResponse, BackendRequest, RawVad, TranscribeResponse, ANALYZE_PATH, TRANSCRIBE_PATH};
use super::{
    validate_transcript, BackendConfig, BackendError, BackendErrorKind, SerBackend, TimeSpan, Transcriber,
    TranscriptSegment,
};
use crate::audio::AudioClip;
use crate::emotion::VadPoint;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct HttpEndpoint {
    client: reqwest::Client,
    base: String,
    attempts: u32,
}

impl HttpEndpoint {
    fn new(cfg: &BackendConfig) -> Result<Self> {
        cfg.validate()?;
        let base = cfg
            .endpoint_url
            .clone()
            .ok_or_else(|| Error::Input("external backend requires an endpoint URL".into()))?;
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs_f64(cfg.timeout_s))
            .build()
            .map_err(|e| Error::Input(format!("cannot build HTTP client: {e}")))?;
        Ok(HttpEndpoint {
            client,
            base: base.trim_end_matches('/').to_owned(),
            attempts: cfg.retry_count + 1,
        })
    }

    async fn post<T: DeserializeOwned>(&self, path: &str, body: &BackendRequest) -> Result<T, BackendError> {
        let all: Vec<usize> = (0..body.spans.len()).collect();
        let url = format!("{}{}", self.base, path);
        let mut last = None;
        for attempt in 0..self.attempts {
            match self.post_once(&url, body, &all).await {
                Ok(v) => return Ok(v),
                Err(e) if e.is_transient() => {
                    tracing::warn!(%url, attempt, error = %e, "backend request failed");
                    last = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    async fn post_once<T: DeserializeOwned>(
        &self,
        url: &str,
        body: &BackendRequest,
        all: &[usize],
    ) -> Result<T, BackendError> {
        let transport = |e: reqwest::Error| {
            let kind = if e.is_timeout() {
                BackendErrorKind::Timeout
            } else if e.is_connect() {
                BackendErrorKind::Connect
            } else {
                BackendErrorKind::Http
            };
            BackendError::new(kind, all.to_vec(), e.to_string())
        };
        let resp = self.client.post(url).json(body).send().await.map_err(transport)?;
        let status = resp.status();
        let bytes = resp.bytes().await.map_err(transport)?;
        if !status.is_success() {
            return Err(BackendError::new(
                BackendErrorKind::Http,
                all.to_vec(),
                format!("status {status}"),
            ));
        }
        serde_json::from_slice(&bytes)
            .map_err(|e| BackendError::new(BackendErrorKind::Malformed, all.to_vec(), e.to_string()))
    }
}

/// Maps a raw `[0, 1]` model triple onto the canonical `[-1, 1]` scale.
pub fn rescale_raw(raw: &RawVad) -> Option<VadPoint> {
    let ok = |x: f64| x.is_finite() && (0.0..=1.0).contains(&x);
    if !(ok(raw.valence) && ok(raw.arousal) && ok(raw.dominance)) {
        return None;
    }
    VadPoint::new(
        2.0 * raw.valence - 1.0,
        2.0 * raw.arousal - 1.0,
        2.0 * raw.dominance - 1.0,
    )
    .ok()
}

/// Converts an analyze response into canonical points, checking arity and
/// ranges.
pub fn points_from_response(resp: &AnalyzeResponse, span_count: usize) -> Result<Vec<VadPoint>, BackendError> {
    if resp.results.len() != span_count {
        return Err(BackendError::new(
            BackendErrorKind::Malformed,
            (0..span_count).collect(),
            format!("expected {span_count} results, got {}", resp.results.len()),
        ));
    }
    let mut bad = Vec::new();
    let mut points = Vec::with_capacity(span_count);
    for (i, raw) in resp.results.iter().enumerate() {
        match rescale_raw(raw) {
            Some(p) => points.push(p),
            None => bad.push(i),
        }
    }
    if !bad.is_empty() {
        return Err(BackendError::new(
            BackendErrorKind::OutOfRange,
            bad,
            "values outside [0, 1]",
        ));
    }
    Ok(points)
}

/// SER client for `POST {base}/analyze`.
#[derive(Debug, Clone)]
pub struct HttpSerBackend {
    endpoint: HttpEndpoint,
}

impl HttpSerBackend {
    pub fn new(cfg: &BackendConfig) -> Result<Self> {
        Ok(HttpSerBackend {
            endpoint: HttpEndpoint::new(cfg)?,
        })
    }
}

#[async_trait]
impl SerBackend for HttpSerBackend {
    async fn analyze(&self, clip: &AudioClip, spans: &[TimeSpan]) -> Result<Vec<VadPoint>, BackendError> {
        let body = BackendRequest::new(clip, spans);
        let resp: AnalyzeResponse = self.endpoint.post(ANALYZE_PATH, &body).await?;
        points_from_response(&resp, spans.len())
    }
}

/// Transcription client for `POST {base}/transcribe`.
#[derive(Debug, Clone)]
pub struct HttpTranscriber {
    endpoint: HttpEndpoint,
}

impl HttpTranscriber {
    pub fn new(cfg: &BackendConfig) -> Result<Self> {
        Ok(HttpTranscriber {
            endpoint: HttpEndpoint::new(cfg)?,
        })
    }
}

#[async_trait]
impl Transcriber for HttpTranscriber {
    async fn transcribe(&self, clip: &AudioClip) -> Result<Vec<TranscriptSegment>, BackendError> {
        let body = BackendRequest::new(clip, &[TimeSpan::new(0.0, clip.duration_s())]);
        let resp: TranscribeResponse = self.endpoint.post(TRANSCRIBE_PATH, &body).await?;
        validate_transcript(&resp.segments).map_err(|m| BackendError::new(BackendErrorKind::Malformed, vec![0], m))?;
        Ok(resp.segments)
    }
}
