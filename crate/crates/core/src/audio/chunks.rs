use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::fixed6;

pub const DEFAULT_CHUNK_S: f64 = 0.5;

/// One analysis window of a message.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChunkSpan {
    pub index: usize,
    #[serde(serialize_with = "fixed6")]
    pub start_s: f64,
    #[serde(serialize_with = "fixed6")]
    pub end_s: f64,
}

impl ChunkSpan {
    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start_s <= t && t < self.end_s
    }
}

/// Partitions `[0, duration_s]` into `chunk_s` windows. A trailing remainder
/// shorter than half a chunk is folded into the previous window; a message
/// shorter than one chunk is a single window.
pub fn chunk_spans(duration_s: f64, chunk_s: f64) -> Result<Vec<ChunkSpan>> {
    if !duration_s.is_finite() || duration_s <= 0.0 {
        return Err(Error::Input(format!("duration must be positive, got {duration_s}")));
    }
    if !chunk_s.is_finite() || chunk_s <= 0.0 {
        return Err(Error::Input(format!("chunk length must be positive, got {chunk_s}")));
    }
    let full = (duration_s / chunk_s).floor() as usize;
    if full == 0 {
        return Ok(vec![ChunkSpan {
            index: 0,
            start_s: 0.0,
            end_s: duration_s,
        }]);
    }
    let remainder = duration_s - full as f64 * chunk_s;
    let mut spans: Vec<ChunkSpan> = (0..full)
        .map(|i| ChunkSpan {
            index: i,
            start_s: i as f64 * chunk_s,
            end_s: (i + 1) as f64 * chunk_s,
        })
        .collect();
    if remainder < chunk_s / 2.0 {
        spans.last_mut().expect("at least one full chunk").end_s = duration_s;
    } else {
        spans.push(ChunkSpan {
            index: full,
            start_s: full as f64 * chunk_s,
            end_s: duration_s,
        });
    }
    Ok(spans)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bounds(spans: &[ChunkSpan]) -> Vec<(f64, f64)> {
        spans.iter().map(|s| (s.start_s, s.end_s)).collect()
    }

    #[test]
    fn two_seconds_is_four_chunks() {
        assert_eq!(
            bounds(&chunk_spans(2.0, 0.5).unwrap()),
            vec![(0.0, 0.5), (0.5, 1.0), (1.0, 1.5), (1.5, 2.0)]
        );
    }

    #[test]
    fn short_remainder_merges() {
        assert_eq!(bounds(&chunk_spans(1.2, 0.5).unwrap()), vec![(0.0, 0.5), (0.5, 1.2)]);
    }

    #[test]
    fn long_remainder_stands_alone() {
        assert_eq!(
            bounds(&chunk_spans(1.3, 0.5).unwrap()),
            vec![(0.0, 0.5), (0.5, 1.0), (1.0, 1.3)]
        );
    }

    #[test]
    fn short_message_is_one_span() {
        assert_eq!(bounds(&chunk_spans(0.2, 0.5).unwrap()), vec![(0.0, 0.2)]);
        assert_eq!(bounds(&chunk_spans(0.6, 0.5).unwrap()), vec![(0.0, 0.6)]);
    }

    #[test]
    fn non_positive_duration_rejected() {
        assert!(chunk_spans(0.0, 0.5).is_err());
        assert!(chunk_spans(-1.0, 0.5).is_err());
        assert!(chunk_spans(f64::NAN, 0.5).is_err());
        assert!(chunk_spans(1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn partitions_exactly(d in 0.01f64..300.0) {
            let spans = chunk_spans(d, 0.5).unwrap();
            prop_assert_eq!(spans[0].start_s, 0.0);
            prop_assert_eq!(spans.last().unwrap().end_s, d);
            for w in spans.windows(2) {
                prop_assert_eq!(w[0].end_s, w[1].start_s);
            }
            for (i, s) in spans.iter().enumerate() {
                prop_assert_eq!(s.index, i);
                if i + 1 < spans.len() {
                    prop_assert_eq!(s.duration_s(), 0.5);
                }
                if spans.len() > 1 {
                    prop_assert!(s.duration_s() >= 0.25 - 1e-9);
                }
            }
        }
    }
}
