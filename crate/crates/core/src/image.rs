//! Raster containers shared by every stage.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Sample storage type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Depth {
    /// 8-bit samples in `[0, 255]`.
    U8,
    /// Real samples normalized to `[0, 1]`.
    F32,
}

#[derive(Clone, Debug, PartialEq)]
enum Samples {
    U8(Vec<u8>),
    F32(Vec<f32>),
}

/// Row-major raster with 1 (gray) or 3 (interleaved RGB) channels.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    samples: Samples,
}

fn check_geometry(width: usize, height: usize, channels: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Geometry(format!("{width}x{height} has a zero dimension")));
    }
    if channels != 1 && channels != 3 {
        return Err(Error::Geometry(format!("{channels} channels (need 1 or 3)")));
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::Geometry(format!("{width}x{height}x{channels} overflows")))?;
    if expected != len {
        return Err(Error::Geometry(format!(
            "{width}x{height}x{channels} needs {expected} samples, got {len}"
        )));
    }
    Ok(())
}

impl ImageBuffer {
    pub fn from_u8(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        check_geometry(width, height, channels, data.len())?;
        Ok(Self { width, height, channels, samples: Samples::U8(data) })
    }

    /// Rejects samples outside `[0, 1]` (including NaN).
    pub fn from_f32(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        check_geometry(width, height, channels, data.len())?;
        if let Some(&bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::SampleRange(bad));
        }
        Ok(Self { width, height, channels, samples: Samples::F32(data) })
    }

    pub fn gray(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        Self::from_u8(width, height, 1, data)
    }

    pub fn rgb(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        Self::from_u8(width, height, 3, data)
    }

    /// A single-channel U8 image filled with `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::gray(width, height, alloc::vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn depth(&self) -> Depth {
        match self.samples {
            Samples::U8(_) => Depth::U8,
            Samples::F32(_) => Depth::F32,
        }
    }

    pub fn as_u8(&self) -> Option<&[u8]> {
        match &self.samples {
            Samples::U8(v) => Some(v),
            Samples::F32(_) => None,
        }
    }

    pub fn as_f32(&self) -> Option<&[f32]> {
        match &self.samples {
            Samples::F32(v) => Some(v),
            Samples::U8(_) => None,
        }
    }

    /// U8 samples, or a depth error.
    pub fn u8_samples(&self) -> Result<&[u8]> {
        self.as_u8().ok_or(Error::Depth { expected: Depth::U8 })
    }

    pub fn into_u8(self) -> Result<Vec<u8>> {
        match self.samples {
            Samples::U8(v) => Ok(v),
            Samples::F32(_) => Err(Error::Depth { expected: Depth::U8 }),
        }
    }

    /// Samples of a single-channel U8 image; the precondition of most kernels.
    pub fn gray_u8(&self) -> Result<&[u8]> {
        if self.channels != 1 {
            return Err(Error::Channels { expected: 1, found: self.channels });
        }
        self.u8_samples()
    }

    /// Sample at column `x`, row `y`, channel `c` as a normalized real.
    pub fn sample(&self, x: usize, y: usize, c: usize) -> f32 {
        let i = (y * self.width + x) * self.channels + c;
        match &self.samples {
            Samples::U8(v) => v[i] as f32 / 255.0,
            Samples::F32(v) => v[i],
        }
    }

    /// U8 → F32 via `v / 255`. F32 images are returned unchanged.
    pub fn to_f32(&self) -> ImageBuffer {
        match &self.samples {
            Samples::F32(_) => self.clone(),
            Samples::U8(v) => ImageBuffer {
                width: self.width,
                height: self.height,
                channels: self.channels,
                samples: Samples::F32(v.iter().map(|&s| s as f32 / 255.0).collect()),
            },
        }
    }

    /// F32 → U8 via `round(v * 255)` clamped. U8 images are returned unchanged.
    pub fn quantize(&self) -> ImageBuffer {
        match &self.samples {
            Samples::U8(_) => self.clone(),
            Samples::F32(v) => ImageBuffer {
                width: self.width,
                height: self.height,
                channels: self.channels,
                samples: Samples::U8(v.iter().map(|&s| quantize_unit(s as f64)).collect()),
            },
        }
    }
}

/// Canonical `[0, 1]` → `[0, 255]` quantization: `round(v * 255)`, clamped.
pub fn quantize_unit(v: f64) -> u8 {
    let scaled = libm::round(v * 255.0);
    if scaled.is_nan() || scaled <= 0.0 {
        0
    } else if scaled >= 255.0 {
        255
    } else {
        scaled as u8
    }
}

/// Axis-aligned rectangle, top-left inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Roi {
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
}

impl Roi {
    pub fn new(x0: usize, y0: usize, w: usize, h: usize) -> Self {
        Self { x0, y0, w, h }
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self { x0: 0, y0: 0, w: width, h: height }
    }

    pub fn check(&self, width: usize, height: usize) -> Result<()> {
        let fits = self.w >= 1
            && self.h >= 1
            && self.x0.checked_add(self.w).is_some_and(|e| e <= width)
            && self.y0.checked_add(self.h).is_some_and(|e| e <= height);
        if fits {
            Ok(())
        } else {
            Err(Error::RoiOutOfBounds { roi: *self, width, height })
        }
    }
}

/// Copies the `roi` window out of `img`.
pub fn extract_roi(img: &ImageBuffer, roi: Roi) -> Result<ImageBuffer> {
    roi.check(img.width, img.height)?;
    let c = img.channels;
    let rows = |src_row_len: usize| {
        (roi.y0..roi.y0 + roi.h).map(move |y| {
            let start = (y * src_row_len + roi.x0) * c;
            start..start + roi.w * c
        })
    };
    let samples = match &img.samples {
        Samples::U8(v) => Samples::U8(rows(img.width).flat_map(|r| v[r].iter().copied()).collect()),
        Samples::F32(v) => Samples::F32(rows(img.width).flat_map(|r| v[r].iter().copied()).collect()),
    };
    Ok(ImageBuffer { width: roi.w, height: roi.h, channels: c, samples })
}

/// Frames per second as a rational, as carried by Y4M headers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FrameRate {
    pub num: u32,
    pub den: u32,
}

impl Default for FrameRate {
    fn default() -> Self {
        Self { num: 30, den: 1 }
    }
}

/// An ordered sequence of frames sharing geometry, channel count and depth.
#[derive(Clone, Debug, PartialEq)]
pub struct VideoStream {
    width: usize,
    height: usize,
    rate: FrameRate,
    frames: Vec<ImageBuffer>,
}

impl VideoStream {
    pub fn new(width: usize, height: usize, rate: FrameRate) -> Self {
        Self { width, height, rate, frames: Vec::new() }
    }

    pub fn from_frames(rate: FrameRate, frames: Vec<ImageBuffer>) -> Result<Self> {
        let Some(first) = frames.first() else {
            return Err(Error::Geometry("cannot infer geometry from zero frames".into()));
        };
        let mut s = Self::new(first.width, first.height, rate);
        for f in frames {
            s.push(f)?;
        }
        Ok(s)
    }

    /// Appends a frame, enforcing homogeneity with the frames already held.
    pub fn push(&mut self, frame: ImageBuffer) -> Result<()> {
        if frame.width != self.width || frame.height != self.height {
            return Err(Error::Geometry(format!(
                "frame {}x{} in {}x{} stream",
                frame.width, frame.height, self.width, self.height
            )));
        }
        if let Some(first) = self.frames.first() {
            if first.channels != frame.channels {
                return Err(Error::Channels { expected: first.channels, found: frame.channels });
            }
            if first.depth() != frame.depth() {
                return Err(Error::Depth { expected: first.depth() });
            }
        }
        self.frames.push(frame);
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn rate(&self) -> FrameRate {
        self.rate
    }

    pub fn frames(&self) -> &[ImageBuffer] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<ImageBuffer> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}
