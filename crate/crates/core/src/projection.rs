//! Bird's-eye-view rasterization in the radar frame.
//!
//! Pixel layout: forward (+x) points up the image and left (+y) points to the
//! image left, with the sensor at the image center. For a grid of side `span`
//! meters and `n` pixels, a point `(x, y)` lands in row
//! `floor((span/2 - x) / res)` and column `floor((span/2 - y) / res)` where
//! `res = span / n`. Each pixel shows the intensity of its highest point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::AffineMatrix;
use crate::image::GrayImage;
use crate::pointcloud::{Point, PointCloud};

pub const RADAR_FRAME: &str = "radar";

pub const DEFAULT_SIZE_PX: usize = 256;
pub const DEFAULT_SPAN_M: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BevGridSpec {
    pub width_px: usize,
    pub height_px: usize,
    /// Full side length of the image in meters.
    pub span_m: f64,
}

impl Default for BevGridSpec {
    fn default() -> Self {
        BevGridSpec { width_px: DEFAULT_SIZE_PX, height_px: DEFAULT_SIZE_PX, span_m: DEFAULT_SPAN_M }
    }
}

impl BevGridSpec {
    pub fn new(size_px: usize, span_m: f64) -> Result<Self> {
        let spec = BevGridSpec { width_px: size_px, height_px: size_px, span_m };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width_px != self.height_px || self.width_px == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid must be square and non-empty, got {}x{}",
                self.width_px, self.height_px
            )));
        }
        if !(self.span_m.is_finite() && self.span_m > 0.0) {
            return Err(Error::InvalidParameter(format!("grid span {} must be > 0", self.span_m)));
        }
        Ok(())
    }

    /// Meters per pixel.
    #[inline]
    pub fn resolution(&self) -> f64 {
        self.span_m / self.width_px as f64
    }

    #[inline]
    pub fn half_span(&self) -> f64 {
        self.span_m / 2.0
    }

    /// `(row, col)` of the pixel containing `(x, y)`, if it is on the grid.
    #[inline]
    pub fn pixel_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let res = self.resolution();
        let row = ((self.half_span() - x) / res).floor();
        let col = ((self.half_span() - y) / res).floor();
        if row >= 0.0 && col >= 0.0 && row < self.height_px as f64 && col < self.width_px as f64 {
            Some((row as usize, col as usize))
        } else {
            None
        }
    }

    /// Metric coordinates `(x, y)` of a pixel center.
    pub fn pixel_center(&self, row: usize, col: usize) -> (f64, f64) {
        let res = self.resolution();
        (
            self.half_span() - (row as f64 + 0.5) * res,
            self.half_span() - (col as f64 + 0.5) * res,
        )
    }

    /// Metric footprint of a pixel as `(x_min, x_max, y_min, y_max)`.
    pub fn pixel_footprint(&self, row: usize, col: usize) -> (f64, f64, f64, f64) {
        let res = self.resolution();
        let h = self.half_span();
        (
            h - (row as f64 + 1.0) * res,
            h - row as f64 * res,
            h - (col as f64 + 1.0) * res,
            h - col as f64 * res,
        )
    }

    pub fn blank(&self) -> BevImage {
        BevImage { spec: *self, image: GrayImage::new(self.width_px, self.height_px) }
    }
}

/// A grayscale raster tied to the grid it was rendered on.
#[derive(Debug, Clone, PartialEq)]
pub struct BevImage {
    pub spec: BevGridSpec,
    pub image: GrayImage,
}

impl BevImage {
    pub fn from_image(spec: BevGridSpec, image: GrayImage) -> Result<Self> {
        if image.width() != spec.width_px || image.height() != spec.height_px {
            return Err(Error::Shape(format!(
                "image is {}x{}, grid is {}x{}",
                image.width(),
                image.height(),
                spec.width_px,
                spec.height_px
            )));
        }
        Ok(BevImage { spec, image })
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.image.get(row, col)
    }
}

/// Maps an intensity in `[0, 1]` to a gray level, rounding half away from zero.
#[inline]
pub fn intensity_to_gray(intensity: f64) -> u8 {
    (255.0 * intensity).round().clamp(0.0, 255.0) as u8
}

pub fn to_radar_frame(cloud: &PointCloud, extrinsic: &AffineMatrix) -> PointCloud {
    cloud.transformed(extrinsic, RADAR_FRAME)
}

/// Drops the points that fall outside the raster.
pub fn crop_to_grid(cloud: &PointCloud, spec: &BevGridSpec) -> PointCloud {
    cloud.filtered(|p| spec.pixel_of(p.x, p.y).is_some())
}

#[derive(Clone, Copy)]
struct Top {
    z: f64,
    intensity: f64,
}

fn rasterize<'a>(
    points: impl Iterator<Item = (usize, &'a Point)>,
    spec: &BevGridSpec,
) -> Result<BevImage> {
    let mut best: Vec<Option<Top>> = vec![None; spec.width_px * spec.height_px];
    for (index, p) in points {
        let Some((row, col)) = spec.pixel_of(p.x, p.y) else {
            return Err(Error::OutOfBounds { index, x: p.x, y: p.y, z: p.z });
        };
        let slot = &mut best[row * spec.width_px + col];
        let wins = match slot {
            None => true,
            Some(t) => p.z > t.z || (p.z == t.z && p.intensity > t.intensity),
        };
        if wins {
            *slot = Some(Top { z: p.z, intensity: p.intensity });
        }
    }
    let pixels = best
        .into_iter()
        .map(|t| t.map_or(0, |t| intensity_to_gray(t.intensity)))
        .collect();
    let image = GrayImage::from_pixels(spec.width_px, spec.height_px, pixels)?;
    Ok(BevImage { spec: *spec, image })
}

/// Rasterizes a radar-frame cloud whose points all lie on the grid.
///
/// Each pixel takes the intensity of its highest point; equal heights are
/// resolved by higher intensity, then by input order.
pub fn project_bev(cloud: &PointCloud, spec: &BevGridSpec) -> Result<BevImage> {
    spec.validate()?;
    if cloud.frame_id() != RADAR_FRAME {
        return Err(Error::FrameMismatch {
            expected: RADAR_FRAME.into(),
            found: cloud.frame_id().into(),
        });
    }
    rasterize(cloud.points().iter().enumerate(), spec)
}

/// Projects a raw LiDAR scan: extrinsic transform, crop to the grid, rasterize.
pub fn project_scan(scan: &PointCloud, extrinsic: &AffineMatrix, spec: &BevGridSpec) -> BevImage {
    let radar = crop_to_grid(&to_radar_frame(scan, extrinsic), spec);
    rasterize(radar.points().iter().enumerate(), spec).expect("cropped points are on the grid")
}
