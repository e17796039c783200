//! Audio canonicalization, chunking, waveform bars and acoustic features.
//!
//! Every clip inside the engine is mono at [`CANONICAL_RATE`] with samples on
//! the 16-bit PCM grid, so that the stored canonical WAV and the clip the
//! pipeline analyzes are the same signal.

mod bars;
mod chunks;
mod features;

use std::io::Cursor;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use bars::{bar_duration, wave_bars, WaveBar, BAR_FLOOR, MAX_BARS};
pub use chunks::{chunk_spans, ChunkSpan, DEFAULT_CHUNK_S};
pub use features::{features, AcousticFeatures};

pub const CANONICAL_RATE: u32 = 16_000;

const PCM16_SCALE: f32 = 32768.0;

/// Mono audio with samples in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f32>,
    sample_rate: u32,
}

impl AudioClip {
    /// Builds a clip, clamping samples into `[-1, 1]`.
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Input("audio clip has no samples".into()));
        }
        if sample_rate == 0 {
            return Err(Error::Input("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::Input(format!("sample {i} is not finite")));
        }
        let samples = samples.into_iter().map(|x| x.clamp(-1.0, 1.0)).collect();
        Ok(AudioClip { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Sample index range covering `[start_s, end_s)`, never empty for a
    /// non-empty interval inside the clip.
    pub fn sample_range(&self, start_s: f64, end_s: f64) -> std::ops::Range<usize> {
        let n = self.samples.len();
        let rate = self.sample_rate as f64;
        let a = ((start_s * rate).round().max(0.0) as usize).min(n);
        let mut b = ((end_s * rate).round().max(0.0) as usize).min(n);
        if b <= a && end_s > start_s && a < n {
            b = a + 1;
        }
        a..b.max(a)
    }

    /// Snaps every sample to the nearest 16-bit PCM value.
    pub fn quantized(mut self) -> Self {
        for x in &mut self.samples {
            *x = f32::from(to_i16(*x)) / PCM16_SCALE;
        }
        self
    }

    /// Little-endian 16-bit PCM payload (no header).
    pub fn to_pcm16_le(&self) -> Vec<u8> {
        self.samples.iter().flat_map(|&x| to_i16(x).to_le_bytes()).collect()
    }
}

fn to_i16(x: f32) -> i16 {
    (x * PCM16_SCALE).round().clamp(-32768.0, 32767.0) as i16
}

/// Decodes RIFF/WAVE (PCM16 or float32, mono or stereo) into a canonical
/// 16 kHz mono clip.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip> {
    if bytes.is_empty() {
        return Err(Error::Decode("empty payload".into()));
    }
    let reader = WavReader::new(Cursor::new(bytes)).map_err(|e| Error::Decode(format!("malformed WAV: {e}")))?;
    let spec = reader.spec();
    if !(1..=2).contains(&spec.channels) {
        return Err(Error::Decode(format!("unsupported channel count {}", spec.channels)));
    }
    if spec.sample_rate == 0 {
        return Err(Error::Decode("sample rate is zero".into()));
    }
    if reader.len() == 0 {
        return Err(Error::Decode("zero-length data chunk".into()));
    }
    let interleaved: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| f32::from(v) / PCM16_SCALE))
            .collect::<std::result::Result<_, _>>(),
        (SampleFormat::Float, 32) => reader.into_samples::<f32>().collect::<std::result::Result<_, _>>(),
        (fmt, bits) => {
            return Err(Error::Decode(format!("unsupported codec: {fmt:?} {bits}-bit")));
        }
    }
    .map_err(|e| Error::Decode(format!("truncated or corrupt sample data: {e}")))?;

    let channels = usize::from(spec.channels);
    let frames = interleaved.len() / channels;
    if frames == 0 {
        return Err(Error::Decode("zero-length data chunk".into()));
    }
    let mono: Vec<f32> = interleaved
        .chunks_exact(channels)
        .map(|f| {
            let s = f.iter().map(|&x| if x.is_finite() { x } else { 0.0 }).sum::<f32>() / channels as f32;
            s.clamp(-1.0, 1.0)
        })
        .collect();
    let resampled = resample_linear(&mono, spec.sample_rate, CANONICAL_RATE);
    Ok(AudioClip::new(resampled, CANONICAL_RATE)?.quantized())
}

/// Linear-interpolation resampler.
pub fn resample_linear(input: &[f32], from_rate: u32, to_rate: u32) -> Vec<f32> {
    if from_rate == to_rate || input.is_empty() {
        return input.to_vec();
    }
    let n_in = input.len() as u64;
    let n_out = ((n_in * u64::from(to_rate) + u64::from(from_rate) / 2) / u64::from(from_rate)).max(1);
    let step = f64::from(from_rate) / f64::from(to_rate);
    (0..n_out)
        .map(|i| {
            let pos = i as f64 * step;
            let j = pos.floor() as usize;
            let frac = (pos - j as f64) as f32;
            match (input.get(j), input.get(j + 1)) {
                (Some(&a), Some(&b)) => a + (b - a) * frac,
                (Some(&a), None) => a,
                _ => input[input.len() - 1],
            }
        })
        .collect()
}

/// Encodes a clip as a 16-bit PCM mono WAV file.
pub fn encode_wav(clip: &AudioClip) -> Vec<u8> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut cursor = Cursor::new(Vec::with_capacity(44 + clip.samples.len() * 2));
    {
        let mut writer = WavWriter::new(&mut cursor, spec).expect("in-memory WAV writer");
        let mut w16 = writer.get_i16_writer(clip.samples.len() as u32);
        for &x in &clip.samples {
            w16.write_sample(to_i16(x));
        }
        w16.flush().expect("in-memory WAV write");
        writer.finalize().expect("in-memory WAV finalize");
    }
    cursor.into_inner()
}

/// Hex SHA-256 of `bytes`; used as the content address of canonical audio.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
