use super::{TimeSpan, TranscriptSegment};

/// Transcript text overlapping `[start_s, end_s)` by more than zero seconds,
/// joined with single spaces in transcript order.
pub fn align_text(start_s: f64, end_s: f64, transcript: &[TranscriptSegment]) -> String {
    let anchor = TimeSpan::new(start_s, end_s);
    transcript
        .iter()
        .filter(|seg| anchor.overlap_s(seg.start_s, seg.end_s) > 0.0)
        .map(|seg| seg.text.trim())
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

/// [`align_text`] for each anchor.
pub fn align(anchors: &[TimeSpan], transcript: &[TranscriptSegment]) -> Vec<String> {
    anchors
        .iter()
        .map(|a| align_text(a.start_s, a.end_s, transcript))
        .collect()
}
