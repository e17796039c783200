//! Continuous emotion space and the mappings from it to visual cues.
//!
//! All values live on the canonical `[-1, 1]` scale per axis. Emoji selection
//! and neutrality only look at the valence/arousal plane; dominance is carried
//! along for completeness but never drives a mapping.

mod color;
mod segments;
mod table;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::fixed6;

pub use color::{color_for, BarColor, NEUTRAL_GRAY};
pub use segments::{interest_segments, ChunkAnalysis, InterestSegment, MIN_SEGMENT_S};
pub use table::{nearest_emoji, EmojiEntry, EmojiTable, DEFAULT_TABLE_JSON, DEFAULT_TABLE_SOURCE};

/// Default neutrality radius in the valence/arousal plane.
pub const DEFAULT_NEUTRAL_TAU: f64 = 0.15;
/// Default radius above which a chunk counts towards an interest segment.
pub const DEFAULT_INTEREST_TAU: f64 = 0.35;

/// A point in valence/arousal/dominance space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VadRepr")]
pub struct VadPoint {
    #[serde(serialize_with = "fixed6")]
    pub valence: f64,
    #[serde(serialize_with = "fixed6")]
    pub arousal: f64,
    #[serde(serialize_with = "fixed6")]
    pub dominance: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VadRepr {
    valence: f64,
    arousal: f64,
    dominance: f64,
}

impl TryFrom<VadRepr> for VadPoint {
    type Error = Error;

    fn try_from(r: VadRepr) -> Result<Self> {
        VadPoint::new(r.valence, r.arousal, r.dominance)
    }
}

fn check_axis(name: &str, x: f64) -> Result<f64> {
    if !x.is_finite() || !(-1.0..=1.0).contains(&x) {
        return Err(Error::InvalidVad(format!("{name} = {x} is outside [-1, 1]")));
    }
    Ok(x)
}

fn clamp_axis(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-1.0, 1.0)
    }
}

impl VadPoint {
    pub const NEUTRAL: VadPoint = VadPoint {
        valence: 0.0,
        arousal: 0.0,
        dominance: 0.0,
    };

    /// Builds a point, rejecting non-finite or out-of-range components.
    pub fn new(valence: f64, arousal: f64, dominance: f64) -> Result<Self> {
        Ok(VadPoint {
            valence: check_axis("valence", valence)?,
            arousal: check_axis("arousal", arousal)?,
            dominance: check_axis("dominance", dominance)?,
        })
    }

    /// Builds a point by clamping each component into `[-1, 1]`. NaN maps to 0.
    pub fn clamped(valence: f64, arousal: f64, dominance: f64) -> Self {
        VadPoint {
            valence: clamp_axis(valence),
            arousal: clamp_axis(arousal),
            dominance: clamp_axis(dominance),
        }
    }

    /// Euclidean norm in the valence/arousal plane.
    pub fn va_norm(&self) -> f64 {
        self.valence.hypot(self.arousal)
    }

    /// Rounds each component to the six decimals used by canonical JSON.
    pub fn rounded6(&self) -> VadPoint {
        let r = |x: f64| (x * 1e6).round() / 1e6;
        VadPoint {
            valence: r(self.valence),
            arousal: r(self.arousal),
            dominance: r(self.dominance),
        }
    }

    pub fn is_neutral(&self, tau_neutral: f64) -> bool {
        is_neutral(self, tau_neutral)
    }
}

/// True when the point lies strictly inside the neutral disc of radius `tau_neutral`.
pub fn is_neutral(p: &VadPoint, tau_neutral: f64) -> bool {
    p.va_norm() < tau_neutral
}

/// Validates a neutrality or interest threshold.
pub fn check_tau(name: &str, tau: f64) -> Result<f64> {
    if !tau.is_finite() || !(0.0..1.0).contains(&tau) {
        return Err(Error::Input(format!("{name} must lie in [0, 1), got {tau}")));
    }
    Ok(tau)
}
