//! Radar-like degradation of a clean BEV raster: blur, speckle, quantization.
//! A stand-in for a sensor model, not radar physics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::BevImage;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadarModel {
    pub blur_sigma_px: f64,
    pub speckle_sigma: f64,
    pub seed: u64,
}

impl Default for RadarModel {
    fn default() -> Self {
        RadarModel { blur_sigma_px: 2.0, speckle_sigma: 0.08, seed: 0 }
    }
}

impl RadarModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("blur_sigma_px", self.blur_sigma_px), ("speckle_sigma", self.speckle_sigma)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} {v} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// Normalized Gaussian taps truncated at `ceil(3 sigma)`.
pub fn gaussian_taps(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let w: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Half-sample symmetric border: `... b a | a b c ... x y z | z y ...`.
#[inline]
pub fn reflect_index(i: i64, n: usize) -> usize {
    let n = n as i64;
    let period = 2 * n;
    let mut k = i.rem_euclid(period);
    if k >= n {
        k = period - 1 - k;
    }
    k as usize
}

pub(crate) fn blur(values: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let taps = gaussian_taps(sigma);
    let radius = (taps.len() / 2) as i64;
    let mut tmp = vec![0.0; values.len()];
    for r in 0..h {
        for c in 0..w {
            tmp[r * w + c] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * values[r * w + reflect_index(c as i64 + k as i64 - radius, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; values.len()];
    for r in 0..h {
        for c in 0..w {
            out[r * w + c] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * tmp[reflect_index(r as i64 + k as i64 - radius, h) * w + c])
                .sum();
        }
    }
    out
}

pub fn render_radar(bev_truth: &BevImage, model: &RadarModel) -> Result<BevImage> {
    model.validate()?;
    let (w, h) = (bev_truth.image.width(), bev_truth.image.height());
    let mut values: Vec<f64> = bev_truth.image.pixels().iter().map(|&v| v as f64).collect();
    if model.blur_sigma_px > 0.0 {
        values = blur(&values, w, h, model.blur_sigma_px);
    }
    if model.speckle_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
        let normal = Normal::new(0.0, model.speckle_sigma).expect("sigma validated");
        for v in values.iter_mut() {
            *v *= 1.0 + normal.sample(&mut rng);
        }
    }
    let mut out = bev_truth.clone();
    for (px, v) in out.image.pixels_mut().iter_mut().zip(values) {
        *px = v.round().clamp(0.0, 255.0) as u8;
    }
    Ok(out)
}
