//! Binary PGM (`P5`) with 8-bit samples.
//!
//! The encoder always writes `P5\n<width> <height>\n255\n` followed by the raw
//! row-major pixels. The decoder accepts any whitespace and `#` comments in the
//! header and any maxval in `1..=255`; samples are rescaled to `0..=255` when
//! the maxval is below 255.

use crate::error::{Error, Result};
use crate::image::GrayImage;

const WHAT: &str = "PGM";

/// Largest accepted width or height; rejects absurd headers before allocating.
pub const MAX_DIMENSION: usize = 1 << 15;

pub fn encode(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.pixels());
    out
}

pub fn decode(bytes: &[u8]) -> Result<GrayImage> {
    if !bytes.starts_with(b"P5") {
        return Err(Error::parse(WHAT, "missing P5 magic"));
    }
    let mut cursor = Header { bytes, pos: 2 };
    let width = cursor.number("width")?;
    let height = cursor.number("height")?;
    let maxval = cursor.number("maxval")?;
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err(Error::parse(WHAT, "missing whitespace after maxval")),
    }
    if width == 0 || height == 0 || width > MAX_DIMENSION || height > MAX_DIMENSION {
        return Err(Error::parse(WHAT, format!("unsupported dimensions {width}x{height}")));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::parse(WHAT, format!("unsupported maxval {maxval}")));
    }
    let n = width * height;
    let data = &bytes[cursor.pos..];
    if data.len() < n {
        return Err(Error::parse(
            WHAT,
            format!("raster truncated: {} of {n} bytes", data.len()),
        ));
    }
    let mut pixels = data[..n].to_vec();
    if maxval < 255 {
        for v in &mut pixels {
            if usize::from(*v) > maxval {
                return Err(Error::parse(WHAT, format!("sample {v} exceeds maxval {maxval}")));
            }
            *v = ((usize::from(*v) * 255 + maxval / 2) / maxval) as u8;
        }
    }
    GrayImage::from_pixels(width, height, pixels)
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_blank(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, field: &str) -> Result<usize> {
        let start = self.pos;
        self.skip_blank();
        if self.pos == start {
            return Err(Error::parse(WHAT, format!("expected whitespace before {field}")));
        }
        let digits_start = self.pos;
        let mut value: usize = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(usize::from(b - b'0')))
                .ok_or_else(|| Error::parse(WHAT, format!("{field} overflows")))?;
            self.pos += 1;
        }
        if self.pos == digits_start {
            return Err(Error::parse(WHAT, format!("expected a number for {field}")));
        }
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_bytes() {
        let img = GrayImage::from_pixels(3, 2, vec![0, 1, 2, 253, 254, 255]).unwrap();
        let bytes = encode(&img);
        assert_eq!(&bytes[..], b"P5\n3 2\n255\n\x00\x01\x02\xfd\xfe\xff");
        assert_eq!(decode(&bytes).unwrap(), img);
    }

    #[test]
    fn header_comments_and_whitespace() {
        let bytes = b"P5 # made by hand\n  2\t1 # dims\n255\n\x10\x20";
        let img = decode(bytes).unwrap();
        assert_eq!(img.pixels(), &[0x10, 0x20]);
    }

    #[test]
    fn low_maxval_is_rescaled() {
        let img = decode(b"P5\n3 1\n15\n\x00\x07\x0f").unwrap();
        assert_eq!(img.pixels(), &[0, 119, 255]);
        assert!(decode(b"P5\n1 1\n15\n\x10").is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(decode(b"P2\n1 1\n255\n0").is_err());
        assert!(decode(b"P5\n2 2\n255\n\x00").is_err());
        assert!(decode(b"P5\n1 1\n65535\n\x00\x00").is_err());
        assert!(decode(b"P5\n0 1\n255\n").is_err());
        assert!(decode(b"P5\n99999999999999999999999 1\n255\n").is_err());
        assert!(decode(b"P5\n1 1\n255").is_err());
        assert!(decode(b"P51 1\n255\n\x00").is_err());
    }
}
