//! PNG input/output through the `png` crate.
//!
//! Decoding converts any color type to 8-bit luma (Rec. 601 weights, alpha
//! dropped); encoding always writes 8-bit grayscale.

use std::io::Cursor;

use png::{BitDepth, ColorType, Decoder, Encoder, Limits, Transformations};

use crate::error::{Error, Result};
use crate::image::GrayImage;

const WHAT: &str = "PNG";

pub fn encode(img: &GrayImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = Encoder::new(&mut out, img.width() as u32, img.height() as u32);
        enc.set_color(ColorType::Grayscale);
        enc.set_depth(BitDepth::Eight);
        let mut writer = enc
            .write_header()
            .map_err(|e| Error::parse(WHAT, e.to_string()))?;
        writer
            .write_image_data(img.pixels())
            .map_err(|e| Error::parse(WHAT, e.to_string()))?;
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<GrayImage> {
    let mut decoder = Decoder::new_with_limits(Cursor::new(bytes), Limits { bytes: 1 << 28 });
    decoder.set_transformations(Transformations::EXPAND | Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(|e| Error::parse(WHAT, e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::parse(WHAT, "image too large"))?;
    let mut buf = vec![0; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::parse(WHAT, e.to_string()))?;
    buf.truncate(info.buffer_size());
    let (w, h) = (info.width as usize, info.height as usize);
    if info.bit_depth != BitDepth::Eight {
        return Err(Error::parse(WHAT, format!("unsupported bit depth {:?}", info.bit_depth)));
    }
    let luma = |r: u8, g: u8, b: u8| -> u8 {
        (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64).round() as u8
    };
    let pixels: Vec<u8> = match info.color_type {
        ColorType::Grayscale => buf,
        ColorType::GrayscaleAlpha => buf.chunks_exact(2).map(|c| c[0]).collect(),
        ColorType::Rgb => buf.chunks_exact(3).map(|c| luma(c[0], c[1], c[2])).collect(),
        ColorType::Rgba => buf.chunks_exact(4).map(|c| luma(c[0], c[1], c[2])).collect(),
        ColorType::Indexed => {
            return Err(Error::parse(WHAT, "palette image was not expanded"));
        }
    };
    GrayImage::from_pixels(w, h, pixels)
}
