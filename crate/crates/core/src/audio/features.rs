use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{AudioClip, ChunkSpan};

/// Deterministic low-level descriptors of one span.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcousticFeatures {
    /// Always `<= 0`.
    pub rms_dbfs: f64,
    pub spectral_centroid_hz: f64,
    pub zero_crossings_per_s: f64,
}

const RMS_GUARD: f64 = 1e-9;

/// Loudness, spectral centroid and zero-crossing rate over `span`.
///
/// The centroid is taken over a single rectangular-window DFT of the whole
/// span. A zero crossing is counted for every sign change between sample `k`
/// and `k + 1` with `k` inside the span, so adjacent spans split a clip's
/// crossings without double counting.
pub fn features(clip: &AudioClip, span: &ChunkSpan) -> AcousticFeatures {
    let range = clip.sample_range(span.start_s, span.end_s);
    let all = clip.samples();
    let x = &all[range.clone()];
    let rate = f64::from(clip.sample_rate());
    if x.is_empty() {
        return AcousticFeatures {
            rms_dbfs: 20.0 * RMS_GUARD.log10(),
            spectral_centroid_hz: 0.0,
            zero_crossings_per_s: 0.0,
        };
    }

    let mean_sq = x.iter().map(|&s| f64::from(s) * f64::from(s)).sum::<f64>() / x.len() as f64;
    let rms_dbfs = (20.0 * (mean_sq.sqrt() + RMS_GUARD).log10()).min(0.0);

    let mut crossings = 0usize;
    for k in range.clone() {
        if let Some(&next) = all.get(k + 1) {
            if (all[k] >= 0.0) != (next >= 0.0) {
                crossings += 1;
            }
        }
    }
    let span_s = x.len() as f64 / rate;

    AcousticFeatures {
        rms_dbfs,
        spectral_centroid_hz: spectral_centroid(x, rate),
        zero_crossings_per_s: crossings as f64 / span_s,
    }
}

fn spectral_centroid(x: &[f32], rate: f64) -> f64 {
    let n = x.len();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&s| Complex::new(f64::from(s), 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let (mut weighted, mut total) = (0.0, 0.0);
    for (k, c) in buf.iter().enumerate().take(n / 2 + 1) {
        let mag = c.norm();
        weighted += k as f64 * rate / n as f64 * mag;
        total += mag;
    }
    if total > 0.0 {
        (weighted / total).clamp(0.0, rate / 2.0)
    } else {
        0.0
    }
}
