//! Speech-emotion augmentation of voice messages.
//!
//! A recorded message is cut into 0.5 s chunks, each chunk and the whole
//! message are scored in valence/arousal/dominance space by a [`SerBackend`],
//! and the scores are mapped to emojis (overall + ending), a colored waveform
//! and optional per-segment emoji sequences. The result is an immutable
//! [`AugmentationDescriptor`] that can be serialized to canonical JSON or
//! rendered to SVG.

pub mod audio;
pub mod backend;
pub mod emotion;
pub mod error;
pub mod json;
pub mod pipeline;
pub mod render;

pub use audio::{
    chunk_spans, content_hash, decode_wav, encode_wav, features, wave_bars, AudioClip, ChunkSpan, WaveBar,
};
pub use backend::{
    align, BackendConfig, BackendError, BackendKind, BaselineBackend, HttpSerBackend, HttpTranscriber, SerBackend,
    TimeSpan, Transcriber, TranscriptSegment,
};
pub use emotion::{
    color_for, interest_segments, is_neutral, nearest_emoji, BarColor, ChunkAnalysis, EmojiEntry, EmojiTable,
    InterestSegment, VadPoint,
};
pub use error::{Error, Result};
pub use pipeline::{ending_span, AugmentationDescriptor, DescriptorStatus, Pipeline, PipelineConfig};
pub use render::{render_svg, RenderOptions};
