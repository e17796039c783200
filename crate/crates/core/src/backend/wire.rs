//! JSON bodies of the backend HTTP protocol.
//!
//! ```text
//! POST {base}/analyze     {"sample_rate":16000,"spans":[{"start_s":..,"end_s":..}],"audio_b64":".."}
//!                      -> {"results":[{"valence":..,"arousal":..,"dominance":..}]}   raw scale [0, 1]
//! POST {base}/transcribe  same request body, spans = [whole message]
//!                      -> {"segments":[{"start_s":..,"end_s":..,"text":".."}]}
//! ```
//!
//! `audio_b64` is standard-alphabet, padded base64 of 16-bit little-endian
//! mono PCM.

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use super::{TimeSpan, TranscriptSegment};
use crate::audio::AudioClip;

pub const ANALYZE_PATH: &str = "/analyze";
pub const TRANSCRIBE_PATH: &str = "/transcribe";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendRequest {
    pub sample_rate: u32,
    pub spans: Vec<TimeSpan>,
    pub audio_b64: String,
}

impl BackendRequest {
    pub fn new(clip: &AudioClip, spans: &[TimeSpan]) -> Self {
        BackendRequest {
            sample_rate: clip.sample_rate(),
            spans: spans.to_vec(),
            audio_b64: STANDARD.encode(clip.to_pcm16_le()),
        }
    }

    /// Decodes the PCM payload back into samples.
    pub fn pcm16(&self) -> Result<Vec<i16>, base64::DecodeError> {
        let bytes = STANDARD.decode(&self.audio_b64)?;
        Ok(bytes
            .chunks_exact(2)
            .map(|b| i16::from_le_bytes([b[0], b[1]]))
            .collect())
    }
}

/// Raw model output on the `[0, 1]` scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawVad {
    pub valence: f64,
    pub arousal: f64,
    pub dominance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeResponse {
    pub results: Vec<RawVad>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscribeResponse {
    pub segments: Vec<TranscriptSegment>,
}
