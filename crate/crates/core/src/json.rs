//! Canonical JSON helpers.
//!
//! Descriptor reals are written as fixed-point numbers with exactly six
//! decimals so that serialization is byte-stable across platforms and runs.

use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::emotion::EmojiEntry;

/// Formats `x` with six decimals, folding negative zero into `0.000000`.
pub fn format_fixed6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_owned()
    } else {
        s
    }
}

pub(crate) fn fixed6<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if !x.is_finite() {
        return Err(S::Error::custom(format!("non-finite real {x}")));
    }
    let raw = RawValue::from_string(format_fixed6(*x)).map_err(S::Error::custom)?;
    raw.serialize(s)
}

#[derive(Serialize)]
struct Emoji6<'a> {
    glyph: &'a str,
    #[serde(serialize_with = "fixed6")]
    valence: f64,
    #[serde(serialize_with = "fixed6")]
    arousal: f64,
    label: &'a str,
}

impl<'a> From<&'a EmojiEntry> for Emoji6<'a> {
    fn from(e: &'a EmojiEntry) -> Self {
        Emoji6 {
            glyph: &e.glyph,
            valence: e.valence,
            arousal: e.arousal,
            label: &e.label,
        }
    }
}

pub(crate) fn emoji6<S: Serializer>(e: &EmojiEntry, s: S) -> Result<S::Ok, S::Error> {
    Emoji6::from(e).serialize(s)
}

pub(crate) fn opt_emoji6<S: Serializer>(e: &Option<EmojiEntry>, s: S) -> Result<S::Ok, S::Error> {
    e.as_ref().map(Emoji6::from).serialize(s)
}
