//! Background removal by brightness thresholding.

use alloc::vec::Vec;

use crate::grayscale::luma_u8;
use crate::{Error, ImageBuffer, Result};

/// Threshold selection for [`remove_background`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Threshold {
    /// Pixels with brightness below this value are cleared.
    Fixed(u8),
    /// Threshold chosen per image by maximizing between-class variance.
    Otsu,
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::Fixed(20)
    }
}

/// Brightness histogram: gray value, or rounded BT.601 luma for RGB.
pub fn brightness_histogram(img: &ImageBuffer) -> Result<[u32; 256]> {
    let mut hist = [0u32; 256];
    for_each_brightness(img, |b| hist[b as usize] += 1)?;
    Ok(hist)
}

fn for_each_brightness(img: &ImageBuffer, mut f: impl FnMut(u8)) -> Result<()> {
    let data = img.u8_samples()?;
    match img.channels() {
        1 => data.iter().for_each(|&v| f(v)),
        3 => data.chunks_exact(3).for_each(|p| f(luma_u8(p[0], p[1], p[2]))),
        c => return Err(Error::Channels { expected: 1, found: c }),
    }
    Ok(())
}

/// Otsu's threshold `t`: the split `{< t} | {>= t}` with maximal
/// between-class variance. The first maximizing split wins; an image with
/// a single level yields `t = 1`.
pub fn otsu_threshold(hist: &[u32; 256]) -> u8 {
    let total: f64 = hist.iter().map(|&c| c as f64).sum();
    let sum: f64 = hist.iter().enumerate().map(|(v, &c)| v as f64 * c as f64).sum();
    let (mut n0, mut s0) = (0.0, 0.0);
    let mut best = (0.0, 0usize);
    for (k, &c) in hist.iter().enumerate().take(255) {
        n0 += c as f64;
        s0 += k as f64 * c as f64;
        let n1 = total - n0;
        if n0 == 0.0 || n1 == 0.0 {
            continue;
        }
        let diff = total * s0 - n0 * sum;
        let between = diff * diff / (n0 * n1);
        if between > best.0 {
            best = (between, k);
        }
    }
    (best.1 + 1) as u8
}

/// Resolves `threshold` for `img` to a concrete level.
pub fn resolve_threshold(img: &ImageBuffer, threshold: Threshold) -> Result<u8> {
    match threshold {
        Threshold::Fixed(t) => Ok(t),
        Threshold::Otsu => Ok(otsu_threshold(&brightness_histogram(img)?)),
    }
}

/// Zeroes every pixel (all channels) whose brightness is below the threshold.
pub fn remove_background(img: &ImageBuffer, threshold: Threshold) -> Result<ImageBuffer> {
    let t = resolve_threshold(img, threshold)?;
    let c = img.channels();
    let mut keep = Vec::with_capacity(img.width() * img.height());
    for_each_brightness(img, |b| keep.push(b >= t))?;
    let data: Vec<u8> = img
        .u8_samples()?
        .chunks_exact(c)
        .zip(keep)
        .flat_map(|(px, k)| px.iter().map(move |&v| if k { v } else { 0 }))
        .collect();
    ImageBuffer::from_u8(img.width(), img.height(), c, data)
}
