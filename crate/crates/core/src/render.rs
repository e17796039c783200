//! SVG rendering of an augmented voice message.
//!
//! Layout, left to right: overall emoji, waveform bars, ending emoji. With
//! segment emojis enabled, the top 30 % of the canvas holds one emoji above
//! each interest segment. Coordinates are printed with two decimals so the
//! output is byte-stable.

use std::fmt::Write as _;

use crate::emotion::{EmojiEntry, NEUTRAL_GRAY};
use crate::error::{Error, Result};
use crate::pipeline::AugmentationDescriptor;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RenderOptions {
    /// Draw interest-segment emojis above their spans.
    pub segments: bool,
}

const SEGMENT_BAND: f64 = 0.3;
const BAR_FILL_RATIO: f64 = 0.7;
const BAR_MAX_RATIO: f64 = 0.9;

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".to_owned()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn emoji_text(out: &mut String, role: &str, e: &EmojiEntry, x: f64, y: f64, size: f64) {
    let _ = writeln!(
        out,
        r#"  <text class="speeji speeji-{role}" data-generated-by="ai" x="{}" y="{}" font-size="{}" text-anchor="middle" dominant-baseline="central"><title>AI-generated: {}</title>{}</text>"#,
        num(x),
        num(y),
        num(size),
        escape(&e.label),
        escape(&e.glyph),
    );
}

/// Renders `d` as an SVG 1.1 document of `width` x `height` pixels.
pub fn render_svg(d: &AugmentationDescriptor, width: f64, height: f64, opts: RenderOptions) -> Result<String> {
    if !(width.is_finite() && width > 0.0 && height.is_finite() && height > 0.0) {
        return Err(Error::Input(format!(
            "render dimensions must be positive, got {width}x{height}"
        )));
    }
    let headline = match (&d.overall_emoji, &d.ending_emoji) {
        (Some(o), Some(e)) if d.is_done() => Some((o, e)),
        _ => None,
    };
    let slot = if headline.is_some() {
        height.min(width / 4.0)
    } else {
        0.0
    };
    let band = if opts.segments && headline.is_some() {
        height * SEGMENT_BAND
    } else {
        0.0
    };
    let wave_x0 = slot;
    let wave_w = width - 2.0 * slot;
    let wave_h = height - band;
    let center_y = band + wave_h / 2.0;

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" data-status="{status}">"#,
        w = num(width),
        h = num(height),
        status = if d.is_done() { "done" } else { "augmentation_failed" },
    );

    if let Some((overall, _)) = headline {
        emoji_text(&mut out, "overall", overall, slot / 2.0, height / 2.0, slot * 0.7);
    }

    out.push_str("  <g class=\"waveform\">\n");
    let n = d.bars.len().max(1) as f64;
    let pitch = wave_w / n;
    let bar_w = pitch * BAR_FILL_RATIO;
    let rx = (bar_w / 2.0).min(2.0);
    for (i, bar) in d.bars.iter().enumerate() {
        let x = wave_x0 + i as f64 * pitch + (pitch - bar_w) / 2.0;
        let bh = (bar.height * wave_h * BAR_MAX_RATIO).max(1.0);
        let fill = match (&bar.color, headline.is_some()) {
            (Some(c), true) => c.css(),
            _ => NEUTRAL_GRAY.css(),
        };
        let _ = writeln!(
            out,
            r#"    <rect x="{}" y="{}" width="{}" height="{}" rx="{}" fill="{}"/>"#,
            num(x),
            num(center_y - bh / 2.0),
            num(bar_w),
            num(bh),
            num(rx),
            fill
        );
    }
    out.push_str("  </g>\n");

    if let Some((_, ending)) = headline {
        emoji_text(&mut out, "ending", ending, width - slot / 2.0, height / 2.0, slot * 0.7);
    }

    if band > 0.0 {
        let scale = wave_w / d.duration_s;
        for seg in &d.interest_segments {
            let x = wave_x0 + (seg.start_s + seg.end_s) / 2.0 * scale;
            emoji_text(&mut out, "segment", &seg.emoji, x, band / 2.0, band * 0.8);
        }
    }

    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_markup() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }

    #[test]
    fn negative_zero_is_normalized() {
        assert_eq!(num(-0.001), "0.00");
        assert_eq!(num(12.3456), "12.35");
    }
}
