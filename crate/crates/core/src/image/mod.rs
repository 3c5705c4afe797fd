//! 8-bit grayscale rasters and their file formats.

pub mod pgm;
pub mod png;

use std::path::Path;

use crate::error::{Error, Result};

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        GrayImage { width, height, pixels: vec![0; width * height] }
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        GrayImage { width, height, pixels: vec![value; width * height] }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width.checked_mul(height) != Some(pixels.len()) {
            return Err(Error::Shape(format!(
                "{} pixels do not fill a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(GrayImage { width, height, pixels })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        GrayImage { width, height, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: u8) {
        self.pixels[row * self.width + col] = v;
    }

    pub fn count_nonzero(&self) -> usize {
        self.pixels.iter().filter(|&&v| v != 0).count()
    }

    pub fn same_shape(&self, other: &GrayImage) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }

    /// Bilinear resample to a new size (pixel-center aligned, edge clamped).
    pub fn resize_bilinear(&self, width: usize, height: usize) -> GrayImage {
        if width == self.width && height == self.height {
            return self.clone();
        }
        if self.width == 0 || self.height == 0 {
            return GrayImage::new(width, height);
        }
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let max_c = (self.width - 1) as f64;
        let max_r = (self.height - 1) as f64;
        GrayImage::from_fn(width, height, |r, c| {
            let fy = ((r as f64 + 0.5) * sy - 0.5).clamp(0.0, max_r);
            let fx = ((c as f64 + 0.5) * sx - 0.5).clamp(0.0, max_c);
            let (r0, c0) = (fy.floor() as usize, fx.floor() as usize);
            let (r1, c1) = ((r0 + 1).min(self.height - 1), (c0 + 1).min(self.width - 1));
            let (ty, tx) = (fy - r0 as f64, fx - c0 as f64);
            let top = self.get(r0, c0) as f64 * (1.0 - tx) + self.get(r0, c1) as f64 * tx;
            let bot = self.get(r1, c0) as f64 * (1.0 - tx) + self.get(r1, c1) as f64 * tx;
            (top * (1.0 - ty) + bot * ty).round().clamp(0.0, 255.0) as u8
        })
    }
}

/// Reads a PGM or PNG file, chosen by content rather than extension.
pub fn read_image(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes)
}

pub fn decode_image(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.starts_with(b"\x89PNG") {
        png::decode(bytes)
    } else {
        pgm::decode(bytes)
    }
}

/// Writes PNG when the extension is `.png`, binary PGM otherwise.
pub fn write_image(path: &Path, img: &GrayImage) -> Result<()> {
    let is_png = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    let bytes = if is_png { png::encode(img)? } else { pgm::encode(img) };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_pixels_checks_length() {
        assert!(GrayImage::from_pixels(2, 2, vec![0; 3]).is_err());
        assert!(GrayImage::from_pixels(2, 2, vec![0; 4]).is_ok());
    }

    #[test]
    fn resize_constant_stays_constant() {
        let img = GrayImage::filled(40, 30, 77);
        let r = img.resize_bilinear(256, 256);
        assert!(r.pixels().iter().all(|&v| v == 77));
    }

    #[test]
    fn resize_same_size_is_copy() {
        let img = GrayImage::from_fn(5, 4, |r, c| (r * 10 + c) as u8);
        assert_eq!(img.resize_bilinear(5, 4), img);
    }

    #[test]
    fn decode_dispatches_on_magic() {
        let img = GrayImage::from_fn(7, 3, |r, c| (r * 31 + c * 7) as u8);
        assert_eq!(decode_image(&pgm::encode(&img)).unwrap(), img);
        assert_eq!(decode_image(&png::encode(&img).unwrap()).unwrap(), img);
    }
}
