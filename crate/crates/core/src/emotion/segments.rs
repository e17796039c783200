use serde::{Deserialize, Serialize};

use super::{EmojiEntry, EmojiTable, VadPoint};
use crate::audio::ChunkSpan;
use crate::json::{emoji6, fixed6};

/// Segments shorter than this are dropped.
pub const MIN_SEGMENT_S: f64 = 0.5;

const EPS: f64 = 1e-9;

/// A chunk span together with the emotion estimated for it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChunkAnalysis {
    pub span: ChunkSpan,
    pub vad: VadPoint,
}

/// A maximal run of emotionally salient chunks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterestSegment {
    #[serde(serialize_with = "fixed6")]
    pub start_s: f64,
    #[serde(serialize_with = "fixed6")]
    pub end_s: f64,
    /// Duration-weighted mean of the member chunks.
    pub centroid: VadPoint,
    #[serde(serialize_with = "emoji6")]
    pub emoji: EmojiEntry,
    /// Transcript text overlapping the segment; empty without a transcript.
    #[serde(default)]
    pub text: String,
}

impl InterestSegment {
    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

/// Merges consecutive chunks whose VA norm reaches `tau_interest` into
/// segments, drops runs shorter than [`MIN_SEGMENT_S`] and labels each with
/// the emoji nearest to its centroid.
pub fn interest_segments(chunks: &[ChunkAnalysis], tau_interest: f64, table: &EmojiTable) -> Vec<InterestSegment> {
    let mut out = Vec::new();
    let mut run: Vec<&ChunkAnalysis> = Vec::new();
    let mut flush = |run: &mut Vec<&ChunkAnalysis>| {
        if let Some(seg) = build_segment(run, table) {
            out.push(seg);
        }
        run.clear();
    };
    for c in chunks {
        if c.vad.va_norm() >= tau_interest {
            run.push(c);
        } else {
            flush(&mut run);
        }
    }
    flush(&mut run);
    out
}

fn build_segment(run: &[&ChunkAnalysis], table: &EmojiTable) -> Option<InterestSegment> {
    let (first, last) = (run.first()?, run.last()?);
    let (start_s, end_s) = (first.span.start_s, last.span.end_s);
    if end_s - start_s < MIN_SEGMENT_S - EPS {
        return None;
    }
    let mut total = 0.0;
    let mut acc = [0.0f64; 3];
    for c in run {
        let w = c.span.duration_s();
        total += w;
        acc[0] += w * c.vad.valence;
        acc[1] += w * c.vad.arousal;
        acc[2] += w * c.vad.dominance;
    }
    let centroid = VadPoint::clamped(acc[0] / total, acc[1] / total, acc[2] / total);
    Some(InterestSegment {
        start_s,
        end_s,
        centroid,
        emoji: table.nearest(&centroid).clone(),
        text: String::new(),
    })
}
