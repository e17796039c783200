use serde::{Deserialize, Serialize};

use super::AudioClip;
use crate::emotion::BarColor;
use crate::json::fixed6;

pub const MAX_BARS: usize = 120;
/// Height of a bar with no signal.
pub const BAR_FLOOR: f64 = 0.05;
const BASE_BAR_S: f64 = 0.1;
const EPS: f64 = 1e-9;

/// One amplitude bar of the message waveform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveBar {
    #[serde(serialize_with = "fixed6")]
    pub start_s: f64,
    #[serde(serialize_with = "fixed6")]
    pub end_s: f64,
    /// Peak-normalized height in `[BAR_FLOOR, 1]`.
    #[serde(serialize_with = "fixed6")]
    pub height: f64,
    /// Filled in by the pipeline; `None` renders as plain gray.
    pub color: Option<BarColor>,
}

impl WaveBar {
    pub fn midpoint_s(&self) -> f64 {
        0.5 * (self.start_s + self.end_s)
    }
}

/// 0.1 s per bar, stretched once the clip would need more than [`MAX_BARS`].
pub fn bar_duration(duration_s: f64) -> f64 {
    if duration_s <= BASE_BAR_S * MAX_BARS as f64 + EPS {
        BASE_BAR_S
    } else {
        duration_s / MAX_BARS as f64
    }
}

/// Peak-normalized amplitude bars, uncolored.
pub fn wave_bars(clip: &AudioClip) -> Vec<WaveBar> {
    let duration = clip.duration_s();
    let bar_s = bar_duration(duration);
    let count = ((duration / bar_s - EPS).ceil() as usize).clamp(1, MAX_BARS);
    let samples = clip.samples();

    let peaks: Vec<f32> = (0..count)
        .map(|i| {
            let start = i as f64 * bar_s;
            let end = if i + 1 == count {
                duration
            } else {
                (i + 1) as f64 * bar_s
            };
            samples[clip.sample_range(start, end)]
                .iter()
                .fold(0.0f32, |m, x| m.max(x.abs()))
        })
        .collect();
    let global = peaks.iter().copied().fold(0.0f32, f32::max);

    peaks
        .iter()
        .enumerate()
        .map(|(i, &peak)| {
            let height = if global > 0.0 {
                (f64::from(peak) / f64::from(global)).max(BAR_FLOOR)
            } else {
                BAR_FLOOR
            };
            WaveBar {
                start_s: i as f64 * bar_s,
                end_s: if i + 1 == count {
                    duration
                } else {
                    (i + 1) as f64 * bar_s
                },
                height,
                color: None,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::CANONICAL_RATE;
    use proptest::prelude::*;

    fn sine(seconds: f64, amp: f32) -> AudioClip {
        let n = (seconds * CANONICAL_RATE as f64) as usize;
        let s = (0..n)
            .map(|i| amp * (i as f32 * 0.05).sin() * (1.0 + (i as f32 / 7000.0).sin()) / 2.0)
            .collect();
        AudioClip::new(s, CANONICAL_RATE).unwrap()
    }

    #[test]
    fn ten_seconds_gives_hundred_bars() {
        let bars = wave_bars(&sine(10.0, 0.8));
        assert_eq!(bars.len(), 100);
        assert!(bars.iter().all(|b| (b.end_s - b.start_s - 0.1).abs() < 1e-9));
        let max = bars.iter().map(|b| b.height).fold(0.0, f64::max);
        assert_eq!(max, 1.0);
    }

    #[test]
    fn thirty_seconds_gives_capped_bars() {
        let bars = wave_bars(&sine(30.0, 0.8));
        assert_eq!(bars.len(), 120);
        assert!(bars.iter().all(|b| (b.end_s - b.start_s - 0.25).abs() < 1e-9));
        assert_eq!(bars.last().unwrap().end_s, 30.0);
    }

    #[test]
    fn silence_floors_every_bar() {
        let clip = AudioClip::new(vec![0.0; 32_000], CANONICAL_RATE).unwrap();
        assert!(wave_bars(&clip).iter().all(|b| b.height == BAR_FLOOR));
    }

    #[test]
    fn partial_last_bar_counted() {
        let bars = wave_bars(&sine(1.05, 0.5));
        assert_eq!(bars.len(), 11);
        assert_eq!(bars.last().unwrap().end_s, 1.05);
    }

    proptest! {
        #[test]
        fn heights_scale_invariant(c in 0.01f32..=1.0, secs in 0.2f64..20.0) {
            let clip = sine(secs, 1.0);
            let scaled = AudioClip::new(clip.samples().iter().map(|x| x * c).collect(), CANONICAL_RATE).unwrap();
            let a = wave_bars(&clip);
            let b = wave_bars(&scaled);
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x.height - y.height).abs() < 1e-6, "{} vs {}", x.height, y.height);
                prop_assert!(x.height >= BAR_FLOOR && x.height <= 1.0);
            }
        }
    }
}
