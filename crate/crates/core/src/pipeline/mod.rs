//! End-to-end augmentation: chunk, analyze, map, compose.

mod descriptor;

use std::sync::Arc;

use crate::audio::{chunk_spans, wave_bars, AudioClip, WaveBar, DEFAULT_CHUNK_S};
use crate::backend::{
    align_text, BackendError, BackendErrorKind, SerBackend, TimeSpan, Transcriber, TranscriptSegment,
};
use crate::emotion::{
    check_tau, color_for, interest_segments, ChunkAnalysis, EmojiTable, DEFAULT_INTEREST_TAU, DEFAULT_NEUTRAL_TAU,
};
use crate::error::{Error, Result};

pub use descriptor::{AugmentationDescriptor, DescriptorStatus, EndingSpan, ENGINE_VERSION, GENERATED_BY};

/// Shortest ending span, in seconds.
pub const MIN_ENDING_S: f64 = 1.5;
/// Fraction of the message covered by the ending span when that is longer.
pub const ENDING_FRACTION: f64 = 0.2;

/// The final part of a message that drives the second headline emoji:
/// `max(1.5 s, 20 %)` anchored at the end, clamped to the message.
pub fn ending_span(duration_s: f64) -> EndingSpan {
    let len = MIN_ENDING_S.max(ENDING_FRACTION * duration_s);
    let start_s = if len >= duration_s { 0.0 } else { duration_s - len };
    EndingSpan {
        start_s,
        end_s: duration_s,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub chunk_s: f64,
    pub neutral_tau: f64,
    pub interest_tau: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            chunk_s: DEFAULT_CHUNK_S,
            neutral_tau: DEFAULT_NEUTRAL_TAU,
            interest_tau: DEFAULT_INTEREST_TAU,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.chunk_s.is_finite() && self.chunk_s > 0.0) {
            return Err(Error::Input(format!(
                "chunk length must be positive, got {}",
                self.chunk_s
            )));
        }
        check_tau("neutral tau", self.neutral_tau)?;
        check_tau("interest tau", self.interest_tau)?;
        Ok(())
    }
}

/// A configured augmentation engine. Cheap to clone and share across tasks.
#[derive(Clone)]
pub struct Pipeline {
    table: Arc<EmojiTable>,
    config: PipelineConfig,
    ser: Arc<dyn SerBackend>,
    transcriber: Option<Arc<dyn Transcriber>>,
}

impl Pipeline {
    pub fn new(
        table: Arc<EmojiTable>,
        config: PipelineConfig,
        ser: Arc<dyn SerBackend>,
        transcriber: Option<Arc<dyn Transcriber>>,
    ) -> Result<Self> {
        config.validate()?;
        Ok(Pipeline {
            table,
            config,
            ser,
            transcriber,
        })
    }

    pub fn table(&self) -> &EmojiTable {
        &self.table
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Runs the full augmentation of one clip.
    ///
    /// The SER backend receives a single request: every chunk span, then the
    /// whole message, then the ending span. Transcription runs alongside it.
    /// SER failure yields an `augmentation_failed` descriptor with gray bars
    /// and no emojis; transcription failure only empties the transcript.
    pub async fn augment(&self, message_id: &str, clip: &AudioClip) -> AugmentationDescriptor {
        let duration = clip.duration_s();
        let spans = chunk_spans(duration, self.config.chunk_s).expect("validated clip and chunk length");
        let ending = ending_span(duration);
        let mut request: Vec<TimeSpan> = spans.iter().map(TimeSpan::from).collect();
        request.push(TimeSpan::new(0.0, duration));
        request.push(TimeSpan::new(ending.start_s, ending.end_s));

        let transcribe = async {
            match &self.transcriber {
                Some(t) => t.transcribe(clip).await,
                None => Ok(Vec::new()),
            }
        };
        let (ser_result, asr_result) = tokio::join!(self.ser.analyze(clip, &request), transcribe);

        let transcript = asr_result.unwrap_or_else(|e| {
            tracing::warn!(message_id, error = %e, "transcription failed; continuing without transcript");
            Vec::new()
        });
        let mut bars = wave_bars(clip);

        let points = ser_result.and_then(|p| {
            if p.len() == request.len() {
                Ok(p)
            } else {
                Err(BackendError::new(
                    BackendErrorKind::Malformed,
                    (0..request.len()).collect(),
                    format!("backend returned {} points for {} spans", p.len(), request.len()),
                ))
            }
        });
        let points: Vec<_> = match points {
            Ok(p) => p.iter().map(|v| v.rounded6()).collect(),
            Err(e) => {
                tracing::warn!(message_id, error = %e, "emotion analysis failed");
                return self.failed(message_id, duration, ending, bars, transcript);
            }
        };

        let n = spans.len();
        let chunks: Vec<ChunkAnalysis> = spans
            .iter()
            .zip(&points[..n])
            .map(|(&span, &vad)| ChunkAnalysis { span, vad })
            .collect();
        let overall = points[n];
        let ending_vad = points[n + 1];

        color_bars(&mut bars, &chunks, self.config.neutral_tau);

        let mut segments = interest_segments(&chunks, self.config.interest_tau, &self.table);
        for s in &mut segments {
            s.text = align_text(s.start_s, s.end_s, &transcript);
        }

        AugmentationDescriptor {
            message_id: message_id.to_owned(),
            duration_s: duration,
            chunks,
            overall: Some(overall),
            ending_span: ending,
            ending: Some(ending_vad),
            overall_emoji: Some(self.table.nearest(&overall).clone()),
            ending_emoji: Some(self.table.nearest(&ending_vad).clone()),
            bars,
            interest_segments: segments,
            transcript,
            status: DescriptorStatus::Done,
            engine_version: ENGINE_VERSION.to_owned(),
            generated_by: GENERATED_BY.to_owned(),
        }
        .canonicalized()
    }

    fn failed(
        &self,
        message_id: &str,
        duration: f64,
        ending: EndingSpan,
        bars: Vec<WaveBar>,
        transcript: Vec<TranscriptSegment>,
    ) -> AugmentationDescriptor {
        AugmentationDescriptor {
            message_id: message_id.to_owned(),
            duration_s: duration,
            chunks: Vec::new(),
            overall: None,
            ending_span: ending,
            ending: None,
            overall_emoji: None,
            ending_emoji: None,
            bars,
            interest_segments: Vec::new(),
            transcript,
            status: DescriptorStatus::AugmentationFailed,
            engine_version: ENGINE_VERSION.to_owned(),
            generated_by: GENERATED_BY.to_owned(),
        }
        .canonicalized()
    }
}

/// Colors each bar from the chunk containing its midpoint.
pub fn color_bars(bars: &mut [WaveBar], chunks: &[ChunkAnalysis], neutral_tau: f64) {
    for bar in bars {
        bar.color = chunk_at(chunks, bar.midpoint_s()).map(|c| color_for(&c.vad, neutral_tau));
    }
}

/// Chunk whose half-open span contains `t`; the last chunk also owns its end.
pub fn chunk_at(chunks: &[ChunkAnalysis], t: f64) -> Option<&ChunkAnalysis> {
    let i = chunks.partition_point(|c| c.span.end_s <= t);
    chunks.get(i).or_else(|| chunks.last().filter(|c| t <= c.span.end_s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{ChunkSpan, CANONICAL_RATE};
    use crate::backend::BaselineBackend;
    use crate::emotion::VadPoint;

    #[test]
    fn ending_span_examples() {
        let s = ending_span(10.0);
        assert_eq!((s.start_s, s.end_s), (8.0, 10.0));
        let s = ending_span(4.0);
        assert_eq!((s.start_s, s.end_s), (2.5, 4.0));
        let s = ending_span(1.0);
        assert_eq!((s.start_s, s.end_s), (0.0, 1.0));
    }

    #[test]
    fn chunk_lookup_by_midpoint() {
        let chunks: Vec<ChunkAnalysis> = [(0.0, 0.5), (0.5, 1.2)]
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| ChunkAnalysis {
                span: ChunkSpan {
                    index: i,
                    start_s: a,
                    end_s: b,
                },
                vad: VadPoint::NEUTRAL,
            })
            .collect();
        assert_eq!(chunk_at(&chunks, 0.05).unwrap().span.index, 0);
        assert_eq!(chunk_at(&chunks, 0.5).unwrap().span.index, 1);
        assert_eq!(chunk_at(&chunks, 1.2).unwrap().span.index, 1);
        assert!(chunk_at(&chunks, 1.3).is_none());
    }

    #[test]
    fn config_rejects_bad_values() {
        let mut cfg = PipelineConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.neutral_tau = 1.0;
        assert!(cfg.validate().is_err());
        let cfg = PipelineConfig {
            chunk_s: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[tokio::test]
    async fn silent_clip_with_baseline() {
        let pipeline = Pipeline::new(
            Arc::new(EmojiTable::builtin()),
            PipelineConfig::default(),
            Arc::new(BaselineBackend),
            None,
        )
        .unwrap();
        let clip = AudioClip::new(vec![0.0; 32_000], CANONICAL_RATE).unwrap();
        let d = pipeline.augment("m1", &clip).await;
        assert!(d.is_done());
        assert_eq!(d.chunks.len(), 4);
        let minus = VadPoint::new(-1.0, -1.0, -1.0).unwrap();
        assert!(d.chunks.iter().all(|c| c.vad == minus));
        assert_eq!(d.bars.len(), 20);
        for b in &d.bars {
            let c = b.color.unwrap();
            assert_eq!((c.hue, c.saturation, c.neutral), (0.0, 35.0, false));
        }
        assert_eq!(d.overall_emoji.as_ref(), Some(pipeline.table().nearest(&minus)));
        assert_eq!(d.generated_by, "ai");
    }
}
