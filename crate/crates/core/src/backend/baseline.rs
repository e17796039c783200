use async_trait::async_trait;

use super::{BackendError, SerBackend, TimeSpan};
use crate::audio::{features, AcousticFeatures, AudioClip, ChunkSpan};
use crate::emotion::VadPoint;

/// Maps acoustic features to a VAD point with fixed linear ramps: loudness
/// drives arousal, spectral centroid drives valence, zero-crossing rate
/// drives dominance. Not an emotion model; it keeps the pipeline
/// deterministic and usable offline.
pub fn baseline_from_features(f: &AcousticFeatures) -> VadPoint {
    VadPoint::clamped(
        (f.spectral_centroid_hz - 1500.0) / 1500.0,
        (f.rms_dbfs + 40.0) / 15.0 - 1.0,
        (f.zero_crossings_per_s - 1500.0) / 1500.0,
    )
}

pub fn baseline_analyze(clip: &AudioClip, span: TimeSpan) -> VadPoint {
    let chunk = ChunkSpan {
        index: 0,
        start_s: span.start_s,
        end_s: span.end_s,
    };
    baseline_from_features(&features(clip, &chunk))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BaselineBackend;

#[async_trait]
impl SerBackend for BaselineBackend {
    async fn analyze(&self, clip: &AudioClip, spans: &[TimeSpan]) -> Result<Vec<VadPoint>, BackendError> {
        Ok(spans.iter().map(|&s| baseline_analyze(clip, s)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::CANONICAL_RATE;

    fn feats(rms: f64, centroid: f64, zc: f64) -> AcousticFeatures {
        AcousticFeatures {
            rms_dbfs: rms,
            spectral_centroid_hz: centroid,
            zero_crossings_per_s: zc,
        }
    }

    #[test]
    fn silence_is_minus_one_everywhere() {
        let clip = AudioClip::new(vec![0.0; 16_000], CANONICAL_RATE).unwrap();
        let p = baseline_analyze(&clip, TimeSpan::new(0.0, 1.0));
        assert_eq!(p, VadPoint::new(-1.0, -1.0, -1.0).unwrap());
    }

    #[test]
    fn arousal_ramp() {
        let p = baseline_from_features(&feats(-30.0, 1500.0, 1500.0));
        assert!((p.arousal + 1.0 / 3.0).abs() < 1e-12);
        assert_eq!((p.valence, p.dominance), (0.0, 0.0));
        assert!((baseline_from_features(&feats(-20.0, 0.0, 0.0)).arousal - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn clamps_at_extremes() {
        let p = baseline_from_features(&feats(0.0, 8000.0, 8000.0));
        assert_eq!((p.valence, p.arousal, p.dominance), (1.0, 1.0, 1.0));
    }

    #[tokio::test]
    async fn backend_returns_one_point_per_span() {
        let clip = AudioClip::new(vec![0.1; 16_000], CANONICAL_RATE).unwrap();
        let spans = [
            TimeSpan::new(0.0, 0.5),
            TimeSpan::new(0.5, 1.0),
            TimeSpan::new(0.0, 1.0),
        ];
        let out = BaselineBackend.analyze(&clip, &spans).await.unwrap();
        assert_eq!(out.len(), 3);
    }
}
