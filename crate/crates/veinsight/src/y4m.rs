//! Uncompressed YUV4MPEG2 video.
//!
//! Reading accepts `C420` (and its `jpeg`/`paldv`/`mpeg2` siting variants)
//! and `Cmono`. 4:2:0 frames are upsampled nearest-neighbor and converted to
//! RGB with full-range BT.601; mono frames stay single-channel. A header
//! repeated mid-stream with identical parameters is accepted, so byte-wise
//! concatenated files read as one stream.

use std::fs;
use std::path::Path;

use veinsight_core::{Depth, FrameRate, ImageBuffer, VideoStream};

use crate::{Error, Result};

const MAGIC: &[u8] = b"YUV4MPEG2";
const FRAME: &[u8] = b"FRAME";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Colorspace {
    C420,
    Mono,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamHeader {
    pub width: usize,
    pub height: usize,
    pub rate: FrameRate,
    pub colorspace: Colorspace,
}

impl StreamHeader {
    fn frame_len(&self) -> usize {
        let luma = self.width * self.height;
        match self.colorspace {
            Colorspace::Mono => luma,
            Colorspace::C420 => luma + 2 * self.width.div_ceil(2) * self.height.div_ceil(2),
        }
    }
}

/// Returns the line starting at `pos` (without the newline) and the offset
/// just past it.
fn line(bytes: &[u8], pos: usize) -> Result<(&[u8], usize)> {
    let rest = &bytes[pos..];
    let end = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::format(bytes.len(), "unterminated header line"))?;
    Ok((&rest[..end], pos + end + 1))
}

fn parse_header(bytes: &[u8], pos: usize) -> Result<(StreamHeader, usize)> {
    if !bytes[pos..].starts_with(MAGIC) {
        return Err(Error::format(pos, "missing YUV4MPEG2 magic"));
    }
    let (text, next) = line(bytes, pos)?;
    let (mut width, mut height) = (None, None);
    let mut rate = FrameRate::default();
    let mut colorspace = Colorspace::C420;
    let mut offset = pos + MAGIC.len();
    for token in text[MAGIC.len()..].split(|&b| b == b' ') {
        let at = offset;
        offset += token.len() + 1;
        let Some((&tag, value)) = token.split_first() else { continue };
        let value = std::str::from_utf8(value).map_err(|_| Error::format(at, "non-ascii parameter"))?;
        let num = |v: &str| v.parse::<usize>().map_err(|_| Error::format(at, format!("bad value {v:?}")));
        match tag {
            b'W' => width = Some(num(value)?),
            b'H' => height = Some(num(value)?),
            b'F' => {
                let (n, d) = value.split_once(':').ok_or_else(|| Error::format(at, "bad frame rate"))?;
                let parse = |v: &str| v.parse::<u32>().map_err(|_| Error::format(at, "bad frame rate"));
                rate = FrameRate { num: parse(n)?, den: parse(d)? };
            }
            b'C' => {
                colorspace = match value {
                    "420" | "420jpeg" | "420paldv" | "420mpeg2" => Colorspace::C420,
                    "mono" => Colorspace::Mono,
                    other => return Err(Error::format(at, format!("unsupported colorspace C{other}"))),
                }
            }
            // Interlacing, aspect ratio and extensions do not affect decoding.
            _ => {}
        }
    }
    let (Some(width), Some(height)) = (width, height) else {
        return Err(Error::format(pos, "header lacks W or H"));
    };
    if width == 0 || height == 0 {
        return Err(Error::format(pos, format!("zero dimension {width}x{height}")));
    }
    Ok((StreamHeader { width, height, rate, colorspace }, next))
}

fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Full-range BT.601 YCbCr to RGB.
pub fn ycbcr_to_rgb(y: u8, cb: u8, cr: u8) -> [u8; 3] {
    let (y, cb, cr) = (y as f64, cb as f64 - 128.0, cr as f64 - 128.0);
    [clamp_u8(y + 1.402 * cr), clamp_u8(y - 0.344136 * cb - 0.714136 * cr), clamp_u8(y + 1.772 * cb)]
}

/// Full-range BT.601 RGB to YCbCr.
pub fn rgb_to_ycbcr(r: f64, g: f64, b: f64) -> [u8; 3] {
    [
        clamp_u8(0.299 * r + 0.587 * g + 0.114 * b),
        clamp_u8(128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b),
        clamp_u8(128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b),
    ]
}

fn decode_frame(h: &StreamHeader, payload: &[u8]) -> Result<ImageBuffer> {
    let (w, ht) = (h.width, h.height);
    match h.colorspace {
        Colorspace::Mono => Ok(ImageBuffer::gray(w, ht, payload.to_vec())?),
        Colorspace::C420 => {
            let cw = w.div_ceil(2);
            let (luma, chroma) = payload.split_at(w * ht);
            let (cb, cr) = chroma.split_at(cw * ht.div_ceil(2));
            let mut rgb = Vec::with_capacity(w * ht * 3);
            for y in 0..ht {
                for x in 0..w {
                    let c = (y / 2) * cw + x / 2;
                    rgb.extend(ycbcr_to_rgb(luma[y * w + x], cb[c], cr[c]));
                }
            }
            Ok(ImageBuffer::rgb(w, ht, rgb)?)
        }
    }
}

/// Decodes a whole stream from memory.
pub fn decode(bytes: &[u8]) -> Result<VideoStream> {
    let (header, mut pos) = parse_header(bytes, 0)?;
    let mut stream = VideoStream::new(header.width, header.height, header.rate);
    let frame_len = header.frame_len();
    while pos < bytes.len() {
        if bytes[pos..].starts_with(MAGIC) {
            let (again, next) = parse_header(bytes, pos)?;
            if again != header {
                return Err(Error::format(pos, "concatenated stream header differs"));
            }
            pos = next;
            continue;
        }
        if !bytes[pos..].starts_with(FRAME) {
            return Err(Error::format(pos, "expected FRAME marker"));
        }
        let (_, start) = line(bytes, pos)?;
        let end = start + frame_len;
        if end > bytes.len() {
            return Err(Error::format(
                bytes.len(),
                format!("short frame payload: need {frame_len} bytes, found {}", bytes.len() - start),
            ));
        }
        stream.push(decode_frame(&header, &bytes[start..end])?)?;
        pos = end;
    }
    Ok(stream)
}

pub fn read_y4m_frames(path: impl AsRef<Path>) -> Result<VideoStream> {
    let path = path.as_ref();
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

/// Encodes U8 frames: gray as `Cmono`, RGB as `C420jpeg` with 2x2-averaged
/// chroma.
pub fn encode(stream: &VideoStream) -> Result<Vec<u8>> {
    let channels = stream.frames().first().map_or(1, ImageBuffer::channels);
    let (w, h) = (stream.width(), stream.height());
    let rate = stream.rate();
    let cs = if channels == 1 { "mono" } else { "420jpeg" };
    let mut out = format!("YUV4MPEG2 W{w} H{h} F{}:{} Ip A1:1 C{cs}\n", rate.num, rate.den).into_bytes();
    for frame in stream.frames() {
        if frame.depth() != Depth::U8 {
            return Err(veinsight_core::Error::Depth { expected: Depth::U8 }.into());
        }
        let data = frame.u8_samples()?;
        out.extend_from_slice(b"FRAME\n");
        if channels == 1 {
            out.extend_from_slice(data);
            continue;
        }
        let px = |x: usize, y: usize| &data[(y * w + x) * 3..(y * w + x) * 3 + 3];
        out.extend((0..w * h).map(|i| {
            let p = px(i % w, i / w);
            rgb_to_ycbcr(p[0] as f64, p[1] as f64, p[2] as f64)[0]
        }));
        let (cw, chh) = (w.div_ceil(2), h.div_ceil(2));
        let mut cb = Vec::with_capacity(cw * chh);
        let mut cr = Vec::with_capacity(cw * chh);
        for cy in 0..chh {
            for cx in 0..cw {
                let mut sum = [0.0f64; 3];
                let mut n = 0.0;
                for y in 2 * cy..(2 * cy + 2).min(h) {
                    for x in 2 * cx..(2 * cx + 2).min(w) {
                        px(x, y).iter().zip(&mut sum).for_each(|(&v, s)| *s += v as f64);
                        n += 1.0;
                    }
                }
                let [_, u, v] = rgb_to_ycbcr(sum[0] / n, sum[1] / n, sum[2] / n);
                cb.push(u);
                cr.push(v);
            }
        }
        out.extend(cb);
        out.extend(cr);
    }
    Ok(out)
}

pub fn write_y4m(stream: &VideoStream, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(stream)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
