//! Color handling: RGB/HSL conversion, named and hex color tokens,
//! tolerance matching and palette extraction.

pub mod names;
mod palette;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use palette::{extract_palette, extract_palette_with, PaletteConfig};

#[derive(Debug, Error, PartialEq)]
pub enum ColorError {
    #[error("`{0}` is neither a web color name nor a 6-digit hex value")]
    UnknownColor(String),
    #[error("cannot extract a palette from an empty image")]
    EmptyImage,
    #[error("tolerance component out of range: {0}")]
    InvalidTolerance(String),
}

/// Hue in degrees `[0, 360)`, saturation and lightness in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hsl {
    pub h: f64,
    pub s: f64,
    pub l: f64,
}

/// Saturation below which a color's hue is ignored when matching.
pub const ACHROMATIC_SATURATION: f64 = 0.05;

pub(crate) fn rgb_to_hsl_f64(r: f64, g: f64, b: f64) -> Hsl {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let l = (max + min) / 2.0;
    let d = max - min;
    if d <= 0.0 {
        return Hsl { h: 0.0, s: 0.0, l };
    }
    let s = (d / (1.0 - (2.0 * l - 1.0).abs())).min(1.0);
    let sector = if max == r {
        ((g - b) / d).rem_euclid(6.0)
    } else if max == g {
        (b - r) / d + 2.0
    } else {
        (r - g) / d + 4.0
    };
    let mut h = 60.0 * sector;
    if h >= 360.0 {
        h -= 360.0;
    }
    Hsl { h, s, l }
}

pub fn rgb_to_hsl(rgb: [u8; 3]) -> Hsl {
    rgb_to_hsl_f64(
        rgb[0] as f64 / 255.0,
        rgb[1] as f64 / 255.0,
        rgb[2] as f64 / 255.0,
    )
}

/// Inverse of [`rgb_to_hsl`], rounding channels to the nearest integer.
pub fn hsl_to_rgb(hsl: Hsl) -> [u8; 3] {
    let s = hsl.s.clamp(0.0, 1.0);
    let l = hsl.l.clamp(0.0, 1.0);
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = hsl.h.rem_euclid(360.0) / 60.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r1, g1, b1) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let to_u8 = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [to_u8(r1), to_u8(g1), to_u8(b1)]
}

/// Shortest angular distance between two hues, in degrees.
pub fn hue_distance(h1: f64, h2: f64) -> f64 {
    let d = (h1 - h2).abs().rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Per-channel maximum HSL differences for two colors to count as close.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorTolerance {
    pub max_hue_delta: f64,
    pub max_sat_delta: f64,
    pub max_light_delta: f64,
}

impl ColorTolerance {
    pub const DEFAULT: ColorTolerance = ColorTolerance {
        max_hue_delta: 30.0,
        max_sat_delta: 0.25,
        max_light_delta: 0.25,
    };

    /// Used when merging palette groups.
    pub const PALETTE_MERGE: ColorTolerance = ColorTolerance {
        max_hue_delta: 15.0,
        max_sat_delta: 0.1,
        max_light_delta: 0.1,
    };

    pub fn new(
        max_hue_delta: f64,
        max_sat_delta: f64,
        max_light_delta: f64,
    ) -> Result<Self, ColorError> {
        if !(0.0..=180.0).contains(&max_hue_delta) {
            return Err(ColorError::InvalidTolerance(format!(
                "hue delta {max_hue_delta}"
            )));
        }
        if !(0.0..=1.0).contains(&max_sat_delta) {
            return Err(ColorError::InvalidTolerance(format!(
                "saturation delta {max_sat_delta}"
            )));
        }
        if !(0.0..=1.0).contains(&max_light_delta) {
            return Err(ColorError::InvalidTolerance(format!(
                "lightness delta {max_light_delta}"
            )));
        }
        Ok(Self {
            max_hue_delta,
            max_sat_delta,
            max_light_delta,
        })
    }

    /// Maps the single tolerance slider `s ∈ [0, 1]` onto `(180·s°, s, s)`.
    pub fn from_slider(s: f64) -> Result<Self, ColorError> {
        if !(0.0..=1.0).contains(&s) {
            return Err(ColorError::InvalidTolerance(format!("slider value {s}")));
        }
        Self::new(180.0 * s, s, s)
    }
}

impl Default for ColorTolerance {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum ColorOrigin {
    Named(String),
    Hex(String),
}

/// A resolved query color.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorSpec {
    pub origin: ColorOrigin,
    pub rgb: [u8; 3],
    pub hsl: Hsl,
}

impl ColorSpec {
    pub fn from_rgb(rgb: [u8; 3]) -> Self {
        ColorSpec {
            origin: ColorOrigin::Hex(format!("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2])),
            rgb,
            hsl: rgb_to_hsl(rgb),
        }
    }

    /// Lowercase name or `#rrggbb`, the form stored in query atoms.
    pub fn canonical_value(&self) -> &str {
        match &self.origin {
            ColorOrigin::Named(n) => n,
            ColorOrigin::Hex(h) => h,
        }
    }
}

fn parse_hex(token: &str) -> Option<[u8; 3]> {
    let digits = token.strip_prefix('#').unwrap_or(token);
    if digits.len() != 6 || !digits.chars().all(|c| c.is_ascii_hexdigit()) {
        return None;
    }
    let channel = |i: usize| u8::from_str_radix(&digits[i..i + 2], 16).ok();
    Some([channel(0)?, channel(2)?, channel(4)?])
}

/// Resolves a web color name (case-insensitive) or an optionally `#`-prefixed
/// 6-digit hex value.
pub fn parse_color_token(token: &str) -> Result<ColorSpec, ColorError> {
    let token = token.trim();
    let lower = token.to_ascii_lowercase();
    if let Some(rgb) = names::lookup(&lower) {
        return Ok(ColorSpec {
            origin: ColorOrigin::Named(lower),
            rgb,
            hsl: rgb_to_hsl(rgb),
        });
    }
    parse_hex(&lower)
        .map(ColorSpec::from_rgb)
        .ok_or_else(|| ColorError::UnknownColor(token.to_string()))
}

/// Whether two HSL colors are within `tol` on every channel. The hue test is
/// skipped when either color is achromatic.
pub fn hsl_within(a: Hsl, b: Hsl, tol: &ColorTolerance) -> bool {
    let hue_ok = a.s < ACHROMATIC_SATURATION
        || b.s < ACHROMATIC_SATURATION
        || hue_distance(a.h, b.h) <= tol.max_hue_delta;
    hue_ok && (a.s - b.s).abs() <= tol.max_sat_delta && (a.l - b.l).abs() <= tol.max_light_delta
}

pub fn color_matches(palette_entry: Hsl, query: &ColorSpec, tol: &ColorTolerance) -> bool {
    hsl_within(palette_entry, query.hsl, tol)
}
