use serde::{Deserialize, Serialize};

use super::{is_neutral, VadPoint};
use crate::json::fixed6;

/// HSL fill for one waveform bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarColor {
    /// Degrees in `[0, 360)`.
    #[serde(serialize_with = "fixed6")]
    pub hue: f64,
    /// Percent.
    #[serde(serialize_with = "fixed6")]
    pub saturation: f64,
    /// Percent.
    #[serde(serialize_with = "fixed6")]
    pub lightness: f64,
    pub neutral: bool,
}

/// Fill used for neutral chunks and for bars of failed augmentations.
pub const NEUTRAL_GRAY: BarColor = BarColor {
    hue: 0.0,
    saturation: 0.0,
    lightness: 62.0,
    neutral: true,
};

impl BarColor {
    /// CSS/SVG `hsl()` notation.
    pub fn css(&self) -> String {
        format!("hsl({:.1},{:.1}%,{:.1}%)", self.hue, self.saturation, self.lightness)
    }

    pub fn is_valid(&self) -> bool {
        (0.0..360.0).contains(&self.hue)
            && (0.0..=100.0).contains(&self.saturation)
            && (0.0..=100.0).contains(&self.lightness)
    }
}

/// Red-to-green hue ramp over valence, saturation ramp over arousal.
pub fn color_for(p: &VadPoint, tau_neutral: f64) -> BarColor {
    if is_neutral(p, tau_neutral) {
        return NEUTRAL_GRAY;
    }
    BarColor {
        hue: 120.0 * (p.valence + 1.0) / 2.0,
        saturation: 35.0 + 50.0 * (p.arousal + 1.0) / 2.0,
        lightness: 50.0,
        neutral: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: f64, a: f64) -> VadPoint {
        VadPoint::new(v, a, 0.0).unwrap()
    }

    #[test]
    fn extremes() {
        let c = color_for(&p(1.0, 1.0), 0.15);
        assert_eq!(
            (c.hue, c.saturation, c.lightness, c.neutral),
            (120.0, 85.0, 50.0, false)
        );
        let c = color_for(&p(-1.0, -1.0), 0.15);
        assert_eq!((c.hue, c.saturation, c.lightness, c.neutral), (0.0, 35.0, 50.0, false));
    }

    #[test]
    fn neutral_is_gray() {
        assert_eq!(color_for(&p(0.05, -0.1), 0.15), NEUTRAL_GRAY);
        assert_eq!(NEUTRAL_GRAY.saturation, 0.0);
    }

    #[test]
    fn css_notation() {
        assert_eq!(color_for(&p(1.0, 1.0), 0.15).css(), "hsl(120.0,85.0%,50.0%)");
    }

    proptest! {
        #[test]
        fn hue_monotone_in_valence(v1 in -1.0f64..=1.0, v2 in -1.0f64..=1.0, a in -1.0f64..=1.0) {
            let (lo, hi) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
            // tau 0 keeps every point hued
            let c_lo = color_for(&p(lo, a), 0.0);
            let c_hi = color_for(&p(hi, a), 0.0);
            prop_assert!(c_lo.hue <= c_hi.hue);
            prop_assert!(c_lo.is_valid() && c_hi.is_valid());
        }

        #[test]
        fn saturation_monotone_in_arousal(a1 in -1.0f64..=1.0, a2 in -1.0f64..=1.0, v in -1.0f64..=1.0) {
            let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            prop_assert!(color_for(&p(v, lo), 0.0).saturation <= color_for(&p(v, hi), 0.0).saturation);
        }

        #[test]
        fn neutral_never_hued(v in -0.2f64..=0.2, a in -0.2f64..=0.2, tau in 0.0f64..0.99) {
            let q = p(v, a);
            let c = color_for(&q, tau);
            if q.is_neutral(tau) {
                prop_assert!(c.neutral && c.saturation == 0.0);
            } else {
                prop_assert!(!c.neutral);
            }
        }
    }
}
