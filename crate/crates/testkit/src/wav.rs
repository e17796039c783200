//! WAV byte generators.

use std::f64::consts::TAU;
use std::io::Cursor;

use hound::{SampleFormat, WavSpec, WavWriter};

/// PCM16 WAV from per-frame channel values in `[-1, 1]`.
pub fn pcm16(rate: u32, channels: u16, frames: impl IntoIterator<Item = Vec<f64>>) -> Vec<u8> {
    let spec = WavSpec {
        channels,
        sample_rate: rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut cursor = Cursor::new(Vec::new());
    {
        let mut w = WavWriter::new(&mut cursor, spec).expect("wav writer");
        for frame in frames {
            for x in frame {
                w.write_sample((x * 32768.0).round().clamp(-32768.0, 32767.0) as i16)
                    .expect("write sample");
            }
        }
        w.finalize().expect("finalize");
    }
    cursor.into_inner()
}

/// Mono 16 kHz sine.
pub fn sine(freq_hz: f64, amplitude: f64, seconds: f64) -> Vec<u8> {
    let rate = 16_000u32;
    let n = (seconds * f64::from(rate)).round() as usize;
    pcm16(
        rate,
        1,
        (0..n).map(|i| vec![amplitude * (TAU * freq_hz * i as f64 / f64::from(rate)).sin()]),
    )
}

pub fn silence(seconds: f64) -> Vec<u8> {
    let n = (seconds * 16_000.0).round() as usize;
    pcm16(16_000, 1, (0..n).map(|_| vec![0.0]))
}

/// Speech-like test signal: a few harmonics under a slowly varying envelope,
/// so chunks differ in loudness and spectrum.
pub fn speechish(seconds: f64, seed: u32) -> Vec<u8> {
    let rate = 16_000.0;
    let n = (seconds * rate).round() as usize;
    let f0 = 110.0 + f64::from(seed % 7) * 23.0;
    pcm16(
        16_000,
        1,
        (0..n).map(move |i| {
            let t = i as f64 / rate;
            let env = 0.15 + 0.6 * (0.5 + 0.5 * (TAU * 0.37 * t + f64::from(seed)).sin()).powi(2);
            let tone = (TAU * f0 * t).sin()
                + 0.5 * (TAU * 2.0 * f0 * t + 0.3).sin()
                + 0.25 * (TAU * (1200.0 + 400.0 * (TAU * 0.2 * t).sin()) * t).sin();
            vec![env * tone / 1.75]
        }),
    )
}
