use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::VadPoint;
use crate::error::{Error, Result};

/// The shipped 22-entry table.
pub const DEFAULT_TABLE_JSON: &str = include_str!("../../data/emoji_table.json");

pub const DEFAULT_TABLE_SOURCE: &str = "built-in: 22 facial emojis placed on valence/arousal after \
     Kutsuzawa et al. (2022) facial-emoji classification, hand-rescaled to [-1, 1]";

/// One emoji with its valence/arousal placement. Dominance is not part of the
/// mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmojiEntry {
    pub glyph: String,
    pub valence: f64,
    pub arousal: f64,
    pub label: String,
}

impl EmojiEntry {
    fn validate(&self, index: usize) -> Result<()> {
        if self.glyph.is_empty() {
            return Err(Error::Table(format!("entry {index}: empty glyph")));
        }
        for (axis, x) in [("valence", self.valence), ("arousal", self.arousal)] {
            if !x.is_finite() || !(-1.0..=1.0).contains(&x) {
                return Err(Error::Table(format!(
                    "entry {index} ({}): {axis} {x} outside [-1, 1]",
                    self.glyph
                )));
            }
        }
        Ok(())
    }

    fn va_distance_sq(&self, p: &VadPoint) -> f64 {
        let dv = self.valence - p.valence;
        let da = self.arousal - p.arousal;
        dv * dv + da * da
    }
}

/// Ordered emoji set. Order is significant: it breaks distance ties, so
/// curators control which of two equidistant glyphs wins.
///
/// File format: a UTF-8 JSON array of `{glyph, valence, arousal, label}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmojiTable {
    entries: Vec<EmojiEntry>,
    source: String,
}

impl EmojiTable {
    pub fn new(entries: Vec<EmojiEntry>, source: impl Into<String>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Table("table has no entries".into()));
        }
        let mut seen = HashSet::new();
        for (i, e) in entries.iter().enumerate() {
            e.validate(i)?;
            if !seen.insert(e.glyph.as_str()) {
                return Err(Error::Table(format!("entry {i}: duplicate glyph {}", e.glyph)));
            }
        }
        Ok(EmojiTable {
            entries,
            source: source.into(),
        })
    }

    pub fn builtin() -> Self {
        Self::from_json(DEFAULT_TABLE_JSON, DEFAULT_TABLE_SOURCE).expect("built-in emoji table is valid")
    }

    pub fn from_json(json: &str, source: impl Into<String>) -> Result<Self> {
        let entries: Vec<EmojiEntry> =
            serde_json::from_str(json).map_err(|e| Error::Table(format!("malformed table: {e}")))?;
        Self::new(entries, source)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Table(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("table entries serialize")
    }

    pub fn entries(&self) -> &[EmojiEntry] {
        &self.entries
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(min_valence, max_valence, min_arousal, max_arousal)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        self.entries.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(v0, v1, a0, a1), e| {
                (
                    v0.min(e.valence),
                    v1.max(e.valence),
                    a0.min(e.arousal),
                    a1.max(e.arousal),
                )
            },
        )
    }

    pub fn nearest(&self, p: &VadPoint) -> &EmojiEntry {
        nearest_emoji(p, self)
    }
}

/// Entry closest to `p` in the valence/arousal plane. Ties go to the entry
/// stored first.
pub fn nearest_emoji<'t>(p: &VadPoint, table: &'t EmojiTable) -> &'t EmojiEntry {
    let mut best = &table.entries[0];
    let mut best_d = best.va_distance_sq(p);
    for e in &table.entries[1..] {
        let d = e.va_distance_sq(p);
        if d < best_d {
            best = e;
            best_d = d;
        }
    }
    best
}
