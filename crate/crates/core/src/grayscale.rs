//! RGB to gray conversion that blends averaged weighted RGB terms with the
//! total chrominance `U + V`.
//!
//! The quantized result is evaluated exactly: every coefficient is a
//! three-decimal constant, so `I1 = N / 12_000_000` for an integer `N`.
//! Floating-point evaluation lands on the wrong side of `.5` ties for
//! some achromatic inputs (e.g. `v = 54` gives `13.4999..`), which the exact
//! form avoids. [`GrayscaleIntermediates`] keeps the real-valued terms for
//! inspection.

use alloc::vec::Vec;

use crate::{Error, ImageBuffer, Result};

/// Conversion formula selection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum GrayMethod {
    /// Weighted-RGB average blended with total chrominance (default).
    #[default]
    Chrominance,
    /// Plain BT.601 luma, `round(0.299 R + 0.587 G + 0.114 B)`.
    Luma,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct GrayOptions {
    pub method: GrayMethod,
    /// Multiply `I1` by 4 before clamping, restoring display range for
    /// achromatic input.
    pub rescale: bool,
    /// Use the blue-channel terms `B2 = 0.587 G`, `B3 = 0.114 G` as commonly
    /// printed instead of `B2 = 0.587 B`, `B3 = 0.114 B`.
    pub eq6_verbatim: bool,
}

/// Every term of the conversion for one pixel, in real arithmetic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrayscaleIntermediates {
    pub y: f64,
    pub u: f64,
    pub v: f64,
    pub uv: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub r4: f64,
    pub g4: f64,
    pub b4: f64,
    /// Final gray value before clamping and rounding.
    pub i1: f64,
}

impl GrayscaleIntermediates {
    pub fn compute(r: u8, g: u8, b: u8, eq6_verbatim: bool) -> Self {
        let (r, g, b) = (r as f64, g as f64, b as f64);
        let y = 0.299 * r + 0.587 * g + 0.114 * b;
        let u = (b - y) * 0.565;
        let v = (r - y) * 0.713;
        let uv = u + v;
        let (r1, r2, r3) = (r * 0.299, r * 0.587, r * 0.114);
        let (g1, g2, g3) = (g * 0.299, g * 0.587, g * 0.114);
        let (b1, b2, b3) =
            if eq6_verbatim { (b * 0.299, g * 0.587, g * 0.114) } else { (b * 0.299, b * 0.587, b * 0.114) };
        let r4 = (r1 + r2 + r3) / 3.0;
        let g4 = (g1 + g2 + g3) / 3.0;
        let b4 = (b1 + b2 + b3) / 3.0;
        let i1 = (r4 + g4 + b4 + uv) / 4.0;
        Self { y, u, v, uv, r1, r2, r3, g1, g2, g3, b1, b2, b3, r4, g4, b4, i1 }
    }
}

/// Denominator of the exact form of `I1`.
const I1_DENOM: i64 = 12_000_000;

/// `I1 * 12e6` as an exact integer.
fn i1_numerator(r: u8, g: u8, b: u8, eq6_verbatim: bool) -> i64 {
    let (r, g, b) = (r as i64, g as i64, b as i64);
    // Y, U, V scaled by 1e3, 1e6, 1e6.
    let y = 299 * r + 587 * g + 114 * b;
    let uv = (1000 * b - y) * 565 + (1000 * r - y) * 713;
    // R1+R2+R3 etc. scaled by 1e3; each sum is 3 * (R4|G4|B4).
    let b_terms = if eq6_verbatim { 299 * b + 701 * g } else { 1000 * b };
    let rgb = 1000 * r + 1000 * g + b_terms;
    1000 * rgb + 3 * uv
}

/// Clamps `num / den` to `[0, 255]` and rounds half away from zero.
fn clamp_round(num: i64, den: i64) -> u8 {
    if num <= 0 {
        0
    } else if num >= 255 * den {
        255
    } else {
        ((2 * num + den) / (2 * den)) as u8
    }
}

pub fn rgb_to_gray_pixel(r: u8, g: u8, b: u8) -> u8 {
    gray_pixel_with(r, g, b, GrayOptions::default())
}

pub fn gray_pixel_with(r: u8, g: u8, b: u8, opts: GrayOptions) -> u8 {
    match opts.method {
        GrayMethod::Luma => luma_u8(r, g, b),
        GrayMethod::Chrominance => {
            let den = if opts.rescale { I1_DENOM / 4 } else { I1_DENOM };
            clamp_round(i1_numerator(r, g, b, opts.eq6_verbatim), den)
        }
    }
}

/// `0.299 R + 0.587 G + 0.114 B` scaled by 1000, exact.
pub(crate) fn luma_milli(r: u8, g: u8, b: u8) -> u32 {
    299 * r as u32 + 587 * g as u32 + 114 * b as u32
}

/// BT.601 luma rounded half up.
pub fn luma_u8(r: u8, g: u8, b: u8) -> u8 {
    ((luma_milli(r, g, b) + 500) / 1000) as u8
}

pub fn rgb_to_gray(img: &ImageBuffer) -> Result<ImageBuffer> {
    rgb_to_gray_with(img, GrayOptions::default())
}

pub fn rgb_to_gray_with(img: &ImageBuffer, opts: GrayOptions) -> Result<ImageBuffer> {
    if img.channels() != 3 {
        return Err(Error::Channels { expected: 3, found: img.channels() });
    }
    let data: Vec<u8> =
        img.u8_samples()?.chunks_exact(3).map(|p| gray_pixel_with(p[0], p[1], p[2], opts)).collect();
    ImageBuffer::gray(img.width(), img.height(), data)
}
