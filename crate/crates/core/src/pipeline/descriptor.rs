use serde::{Deserialize, Serialize};

use crate::audio::{WaveBar, BAR_FLOOR};
use crate::backend::{validate_transcript, TranscriptSegment};
use crate::emotion::{ChunkAnalysis, EmojiEntry, InterestSegment, VadPoint};
use crate::error::{Error, Result};
use crate::json::{fixed6, opt_emoji6};

/// Attribution literal carried by every descriptor.
pub const GENERATED_BY: &str = "ai";

pub const ENGINE_VERSION: &str = concat!("speejis-core/", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescriptorStatus {
    Done,
    AugmentationFailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndingSpan {
    #[serde(serialize_with = "fixed6")]
    pub start_s: f64,
    #[serde(serialize_with = "fixed6")]
    pub end_s: f64,
}

/// Everything computed for one voice message.
///
/// Serialized as canonical JSON: keys in declaration order, reals with six
/// decimals. See `docs/descriptor.schema.json` for the schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentationDescriptor {
    pub message_id: String,
    #[serde(serialize_with = "fixed6")]
    pub duration_s: f64,
    pub chunks: Vec<ChunkAnalysis>,
    pub overall: Option<VadPoint>,
    pub ending_span: EndingSpan,
    pub ending: Option<VadPoint>,
    #[serde(serialize_with = "opt_emoji6")]
    pub overall_emoji: Option<EmojiEntry>,
    #[serde(serialize_with = "opt_emoji6")]
    pub ending_emoji: Option<EmojiEntry>,
    pub bars: Vec<WaveBar>,
    pub interest_segments: Vec<InterestSegment>,
    pub transcript: Vec<TranscriptSegment>,
    pub status: DescriptorStatus,
    pub engine_version: String,
    pub generated_by: String,
}

impl AugmentationDescriptor {
    pub fn is_done(&self) -> bool {
        self.status == DescriptorStatus::Done
    }

    /// Single-line canonical JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor reals are finite")
    }

    /// Indented canonical JSON with a trailing newline, as written to files.
    pub fn to_pretty_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("descriptor reals are finite");
        s.push('\n');
        s
    }

    /// Parses and validates a descriptor. Errors carry a JSON pointer to the
    /// first offending location.
    pub fn from_json(json: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(json);
        let d: AugmentationDescriptor = serde_path_to_error::deserialize(de).map_err(|e| {
            let mut pointer = pointer_of(e.path());
            let message = e.inner().to_string();
            if let Some(field) = missing_field(&message) {
                pointer.push('/');
                pointer.push_str(field);
            }
            Error::schema(if pointer.is_empty() { "/".to_owned() } else { pointer }, message)
        })?;
        d.validate()?;
        Ok(d)
    }

    /// Rounds every real to its canonical six-decimal value.
    pub fn canonicalized(self) -> Self {
        Self::from_json(&self.to_json()).expect("serialized descriptor re-parses")
    }

    /// Semantic checks beyond the JSON shape.
    pub fn validate(&self) -> Result<()> {
        if self.generated_by != GENERATED_BY {
            return Err(Error::schema("/generated_by", format!("must be \"{GENERATED_BY}\"")));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::schema("/duration_s", "must be positive"));
        }
        let es = &self.ending_span;
        if !(0.0 <= es.start_s && es.start_s < es.end_s && es.end_s <= self.duration_s + 1e-6) {
            return Err(Error::schema(
                "/ending_span",
                "must be a positive span inside the message",
            ));
        }
        let mut prev_end = 0.0;
        for (i, c) in self.chunks.iter().enumerate() {
            if c.span.index != i || (c.span.start_s - prev_end).abs() > 1e-6 || c.span.end_s <= c.span.start_s {
                return Err(Error::schema(
                    format!("/chunks/{i}/span"),
                    "chunks must be contiguous and ordered",
                ));
            }
            prev_end = c.span.end_s;
        }
        if !self.chunks.is_empty() && (prev_end - self.duration_s).abs() > 1e-6 {
            return Err(Error::schema("/chunks", "chunks must cover the whole message"));
        }
        for (i, b) in self.bars.iter().enumerate() {
            if !(BAR_FLOOR - 1e-6..=1.0 + 1e-6).contains(&b.height) {
                return Err(Error::schema(format!("/bars/{i}/height"), "must lie in [0.05, 1]"));
            }
            if b.end_s <= b.start_s {
                return Err(Error::schema(format!("/bars/{i}"), "bar must have positive length"));
            }
            match (&b.color, self.status) {
                (Some(c), _) if !c.is_valid() => {
                    return Err(Error::schema(format!("/bars/{i}/color"), "color out of range"));
                }
                (None, DescriptorStatus::Done) => {
                    return Err(Error::schema(
                        format!("/bars/{i}/color"),
                        "done descriptor needs colored bars",
                    ));
                }
                _ => {}
            }
        }
        for (i, s) in self.interest_segments.iter().enumerate() {
            if !(0.0 <= s.start_s && s.start_s < s.end_s && s.end_s <= self.duration_s + 1e-6) {
                return Err(Error::schema(
                    format!("/interest_segments/{i}"),
                    "segment outside the message",
                ));
            }
        }
        validate_transcript(&self.transcript).map_err(|m| Error::schema("/transcript", m))?;
        match self.status {
            DescriptorStatus::Done => {
                let required = [
                    ("/overall", self.overall.is_some()),
                    ("/ending", self.ending.is_some()),
                    ("/overall_emoji", self.overall_emoji.is_some()),
                    ("/ending_emoji", self.ending_emoji.is_some()),
                    ("/chunks", !self.chunks.is_empty()),
                ];
                if let Some((path, _)) = required.iter().find(|(_, ok)| !ok) {
                    return Err(Error::schema(*path, "required when status is done"));
                }
            }
            DescriptorStatus::AugmentationFailed => {
                if self.overall_emoji.is_some() || self.ending_emoji.is_some() {
                    return Err(Error::schema("/overall_emoji", "failed augmentation carries no emojis"));
                }
            }
        }
        Ok(())
    }
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    out
}

fn missing_field(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("missing field `")?;
    rest.split('`').next()
}
