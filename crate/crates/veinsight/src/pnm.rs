//! Binary PGM (P5) and PPM (P6) with maxval 255.

use std::fs;
use std::path::Path;

use veinsight_core::{Depth, ImageBuffer};

use crate::{Error, Result};

/// Cursor over a netpbm header.
struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n' && c != b'\r') {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(start, format!("{what} out of range")))
    }
}

/// Decodes a P5 or P6 image from memory.
pub fn decode(bytes: &[u8]) -> Result<ImageBuffer> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err(Error::format(0, "missing P5/P6 magic")),
    };
    let mut h = Header { bytes, pos: 2 };
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval_at = h.pos;
    let maxval = h.number("maxval")?;
    if maxval != 255 {
        return Err(Error::format(maxval_at, format!("unsupported maxval {maxval} (need 255)")));
    }
    match bytes.get(h.pos) {
        Some(b) if b.is_ascii_whitespace() => h.pos += 1,
        _ => return Err(Error::format(h.pos, "expected whitespace after maxval")),
    }
    if width == 0 || height == 0 {
        return Err(Error::format(2, format!("zero dimension {width}x{height}")));
    }
    let len = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::format(2, "dimensions overflow"))?;
    let payload = &bytes[h.pos..];
    if payload.len() < len {
        return Err(Error::format(
            bytes.len(),
            format!("truncated payload: need {len} bytes, found {}", payload.len()),
        ));
    }
    Ok(ImageBuffer::from_u8(width, height, channels, payload[..len].to_vec())?)
}

/// Encodes a U8 image as P5 (gray) or P6 (RGB).
pub fn encode(img: &ImageBuffer) -> Result<Vec<u8>> {
    if img.depth() != Depth::U8 {
        return Err(veinsight_core::Error::Depth { expected: Depth::U8 }.into());
    }
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.u8_samples()?);
    Ok(out)
}

pub fn read_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

pub fn write_image(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(img)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_minimal_files() {
        let img = decode(b"P5 2 1 255 \x00\xff").unwrap();
        assert_eq!((img.width(), img.height(), img.channels()), (2, 1, 1));
        assert_eq!(img.as_u8().unwrap(), &[0, 255]);
        let img = decode(b"P6\n1 1\n255\n\x0a\x14\x1e").unwrap();
        assert_eq!(img.channels(), 3);
        assert_eq!(img.as_u8().unwrap(), &[10, 20, 30]);
    }

    #[test]
    fn header_comments() {
        let img = decode(b"P5\n# made by hand\n2 # width\n1\n255\n\x01\x02").unwrap();
        assert_eq!(img.as_u8().unwrap(), &[1, 2]);
    }

    #[test]
    fn truncated_payload() {
        let mut file = b"P5 4 4 255\n".to_vec();
        file.extend([0u8; 8]);
        match decode(&file) {
            Err(Error::Format { offset, message }) => {
                assert_eq!(offset, file.len());
                assert!(message.contains("truncated"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_headers_report_offsets() {
        let offset = |bytes: &[u8]| match decode(bytes) {
            Err(Error::Format { offset, .. }) => offset,
            other => panic!("{other:?}"),
        };
        assert_eq!(offset(b"P3 1 1 255\n1"), 0);
        assert_eq!(offset(b"P5 x 1 255\n1"), 3);
        assert_eq!(offset(b"P5 1 1 65535\n12"), 6);
        assert_eq!(offset(b"P5 1 1 255"), 10);
    }

    #[test]
    fn rgb_payload_size() {
        let img = ImageBuffer::rgb(2, 2, (0..12).collect()).unwrap();
        let bytes = encode(&img).unwrap();
        let header = b"P6\n2 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(bytes.len() - header.len(), 12);
    }

    #[test]
    fn rejects_f32() {
        let img = ImageBuffer::filled(1, 1, 3).unwrap().to_f32();
        assert!(matches!(encode(&img), Err(Error::Core(_))));
    }
}
