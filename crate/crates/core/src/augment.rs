//! Seeded augmentation of radar / ground-truth image pairs.
//!
//! Ops are considered in a fixed order and each fires independently with the
//! configured probability. Every (seed, pair index, op) triple owns its own
//! SplitMix64 stream, so a pair's augmentation never depends on which other
//! pairs were processed or in what order.
//!
//! Geometric ops (shifts, flips, zoom, rotation) move input and target
//! together so the pixel-wise pairing survives. Photometric ops (brightness,
//! contrast, shadow) only touch the input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    #[default]
    Bilinear,
    Nearest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub probability: f64,
    pub seed: u64,
    /// Maximum shift as a fraction of the image side.
    pub shift_fraction: f64,
    pub zoom_range: [f64; 2],
    pub rotation_deg: f64,
    /// Maximum brightness offset as a fraction of full scale.
    pub brightness_fraction: f64,
    pub contrast_range: [f64; 2],
    /// Multiplier applied inside the shadow quadrilateral.
    pub shadow_factor: f64,
    /// Resampling used for the target image.
    pub target_interpolation: Interpolation,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            probability: 0.30,
            seed: 0,
            shift_fraction: 0.10,
            zoom_range: [0.9, 1.1],
            rotation_deg: 5.0,
            brightness_fraction: 0.20,
            contrast_range: [0.8, 1.2],
            shadow_factor: 0.5,
            target_interpolation: Interpolation::Bilinear,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(0.0..=1.0).contains(&self.probability) {
            return bad(format!("probability {} outside [0, 1]", self.probability));
        }
        for (name, [lo, hi]) in [("zoom", self.zoom_range), ("contrast", self.contrast_range)] {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return bad(format!("{name} range [{lo}, {hi}] must be positive and ordered"));
            }
        }
        for (name, v) in [
            ("shift_fraction", self.shift_fraction),
            ("rotation_deg", self.rotation_deg),
            ("brightness_fraction", self.brightness_fraction),
            ("shadow_factor", self.shadow_factor),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} {v} must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

/// Op names in application order.
pub const OP_ORDER: [&str; 9] = [
    "hshift", "vshift", "hflip", "vflip", "zoom", "rotation", "brightness", "contrast", "shadow",
];

/// An op that fired, with its sampled parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum AppliedOp {
    /// Content moves right by `pixels`.
    HShift { pixels: i64 },
    /// Content moves down by `pixels`.
    VShift { pixels: i64 },
    HFlip,
    VFlip,
    /// Scale about the image center; > 1 magnifies.
    Zoom { factor: f64 },
    /// Counter-clockwise rotation about the image center.
    Rotation { degrees: f64 },
    Brightness { delta: f64 },
    Contrast { factor: f64 },
    /// Quadrilateral in `(row, col)` pixel coordinates.
    Shadow { vertices: [[f64; 2]; 4], factor: f64 },
}

impl AppliedOp {
    pub fn name(&self) -> &'static str {
        match self {
            AppliedOp::HShift { .. } => "hshift",
            AppliedOp::VShift { .. } => "vshift",
            AppliedOp::HFlip => "hflip",
            AppliedOp::VFlip => "vflip",
            AppliedOp::Zoom { .. } => "zoom",
            AppliedOp::Rotation { .. } => "rotation",
            AppliedOp::Brightness { .. } => "brightness",
            AppliedOp::Contrast { .. } => "contrast",
            AppliedOp::Shadow { .. } => "shadow",
        }
    }

    pub fn is_geometric(&self) -> bool {
        !matches!(
            self,
            AppliedOp::Brightness { .. } | AppliedOp::Contrast { .. } | AppliedOp::Shadow { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPair {
    pub input: GrayImage,
    pub target: GrayImage,
    pub applied_ops: Vec<AppliedOp>,
}

/// One audit log line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentLog {
    pub pair_index: u64,
    pub ops: Vec<AppliedOp>,
}

/// Samples which ops fire for a pair, and their parameters, for an image of
/// `width x height`.
pub fn sample_ops(cfg: &AugmentConfig, pair_index: u64, width: usize, height: usize) -> Vec<AppliedOp> {
    let mut ops = Vec::new();
    for (op_index, name) in OP_ORDER.iter().enumerate() {
        let mut rng = SplitMix64::keyed(&[cfg.seed, pair_index, op_index as u64]);
        if rng.next_f64() >= cfg.probability {
            continue;
        }
        let op = match *name {
            "hshift" => {
                let max = (cfg.shift_fraction * width as f64).round() as i64;
                AppliedOp::HShift { pixels: rng.int_inclusive(-max, max) }
            }
            "vshift" => {
                let max = (cfg.shift_fraction * height as f64).round() as i64;
                AppliedOp::VShift { pixels: rng.int_inclusive(-max, max) }
            }
            "hflip" => AppliedOp::HFlip,
            "vflip" => AppliedOp::VFlip,
            "zoom" => AppliedOp::Zoom { factor: rng.uniform(cfg.zoom_range[0], cfg.zoom_range[1]) },
            "rotation" => AppliedOp::Rotation { degrees: rng.uniform(-cfg.rotation_deg, cfg.rotation_deg) },
            "brightness" => AppliedOp::Brightness {
                delta: rng.uniform(-cfg.brightness_fraction, cfg.brightness_fraction) * 255.0,
            },
            "contrast" => AppliedOp::Contrast {
                factor: rng.uniform(cfg.contrast_range[0], cfg.contrast_range[1]),
            },
            "shadow" => AppliedOp::Shadow {
                vertices: sample_quad(&mut rng, width, height),
                factor: cfg.shadow_factor,
            },
            _ => unreachable!(),
        };
        ops.push(op);
    }
    ops
}

/// A star-shaped (hence simple) quadrilateral: one vertex per quadrant of
/// angle around a random center.
fn sample_quad(rng: &mut SplitMix64, width: usize, height: usize) -> [[f64; 2]; 4] {
    let side = width.min(height) as f64;
    let cr = rng.uniform(0.0, height as f64);
    let cc = rng.uniform(0.0, width as f64);
    let mut v = [[0.0; 2]; 4];
    for (k, vert) in v.iter_mut().enumerate() {
        let angle = std::f64::consts::FRAC_PI_2 * k as f64
            + rng.uniform(-std::f64::consts::FRAC_PI_8, std::f64::consts::FRAC_PI_8);
        let radius = rng.uniform(0.1, 0.4) * side;
        *vert = [cr + radius * angle.sin(), cc + radius * angle.cos()];
    }
    v
}

/// Float working copy of an image.
#[derive(Clone)]
struct Plane {
    w: usize,
    h: usize,
    v: Vec<f64>,
}

impl Plane {
    fn from_image(img: &GrayImage) -> Self {
        Plane { w: img.width(), h: img.height(), v: img.pixels().iter().map(|&p| p as f64).collect() }
    }

    fn to_image(&self) -> GrayImage {
        let pixels = self.v.iter().map(|&x| x.round().clamp(0.0, 255.0) as u8).collect();
        GrayImage::from_pixels(self.w, self.h, pixels).expect("plane dimensions are consistent")
    }

    fn at(&self, r: i64, c: i64) -> f64 {
        if r < 0 || c < 0 || r >= self.h as i64 || c >= self.w as i64 {
            0.0
        } else {
            self.v[r as usize * self.w + c as usize]
        }
    }

    fn sample(&self, r: f64, c: f64, interp: Interpolation) -> f64 {
        match interp {
            Interpolation::Nearest => self.at(r.round() as i64, c.round() as i64),
            Interpolation::Bilinear => {
                let (r0, c0) = (r.floor(), c.floor());
                let (tr, tc) = (r - r0, c - c0);
                let (r0, c0) = (r0 as i64, c0 as i64);
                let top = self.at(r0, c0) * (1.0 - tc) + self.at(r0, c0 + 1) * tc;
                let bot = self.at(r0 + 1, c0) * (1.0 - tc) + self.at(r0 + 1, c0 + 1) * tc;
                top * (1.0 - tr) + bot * tr
            }
        }
    }

    /// Output pixel `(r, c)` takes the source value at `src(r, c)`.
    fn remap(&self, interp: Interpolation, src: impl Fn(f64, f64) -> (f64, f64)) -> Plane {
        let mut v = Vec::with_capacity(self.v.len());
        for r in 0..self.h {
            for c in 0..self.w {
                let (sr, sc) = src(r as f64, c as f64);
                v.push(self.sample(sr, sc, interp));
            }
        }
        Plane { w: self.w, h: self.h, v }
    }

    fn apply(&self, op: &AppliedOp, interp: Interpolation) -> Plane {
        let cr = (self.h as f64 - 1.0) / 2.0;
        let cc = (self.w as f64 - 1.0) / 2.0;
        let (w, h) = (self.w as i64, self.h as i64);
        let mut out = self.clone();
        match *op {
            AppliedOp::HShift { pixels } => {
                for r in 0..h {
                    for c in 0..w {
                        out.v[(r * w + c) as usize] = self.at(r, c - pixels);
                    }
                }
            }
            AppliedOp::VShift { pixels } => {
                for r in 0..h {
                    for c in 0..w {
                        out.v[(r * w + c) as usize] = self.at(r - pixels, c);
                    }
                }
            }
            AppliedOp::HFlip => {
                for r in 0..h {
                    for c in 0..w {
                        out.v[(r * w + c) as usize] = self.at(r, w - 1 - c);
                    }
                }
            }
            AppliedOp::VFlip => {
                for r in 0..h {
                    for c in 0..w {
                        out.v[(r * w + c) as usize] = self.at(h - 1 - r, c);
                    }
                }
            }
            AppliedOp::Zoom { factor } => {
                out = self.remap(interp, |r, c| (cr + (r - cr) / factor, cc + (c - cc) / factor));
            }
            AppliedOp::Rotation { degrees } => {
                // Inverse map of a counter-clockwise turn, with rows growing down.
                let (s, co) = degrees.to_radians().sin_cos();
                out = self.remap(interp, |r, c| {
                    let (dr, dc) = (r - cr, c - cc);
                    (cr + co * dr + s * dc, cc - s * dr + co * dc)
                });
            }
            AppliedOp::Brightness { delta } => out.v.iter_mut().for_each(|x| *x += delta),
            AppliedOp::Contrast { factor } => {
                let mean = self.v.iter().sum::<f64>() / self.v.len().max(1) as f64;
                out.v.iter_mut().for_each(|x| *x = mean + factor * (*x - mean));
            }
            AppliedOp::Shadow { vertices, factor } => {
                for r in 0..self.h {
                    for c in 0..self.w {
                        if point_in_polygon(r as f64, c as f64, &vertices) {
                            out.v[r * self.w + c] *= factor;
                        }
                    }
                }
            }
        }
        out
    }
}

/// Even-odd crossing test.
fn point_in_polygon(r: f64, c: f64, poly: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let [ri, ci] = poly[i];
        let [rj, cj] = poly[(i + n - 1) % n];
        if (ri > r) != (rj > r) && c < (cj - ci) * (r - ri) / (rj - ri) + ci {
            inside = !inside;
        }
    }
    inside
}

/// Applies `ops` in order. Values stay in floating point between ops and are
/// rounded and clamped once at the end.
pub fn apply_ops(img: &GrayImage, ops: &[AppliedOp], interp: Interpolation) -> GrayImage {
    let mut plane = Plane::from_image(img);
    for op in ops {
        plane = plane.apply(op, interp);
    }
    plane.to_image()
}

pub fn augment_pair(
    input: &GrayImage,
    target: &GrayImage,
    cfg: &AugmentConfig,
    pair_index: u64,
) -> Result<AugmentedPair> {
    input.same_shape(target)?;
    cfg.validate()?;
    let ops = sample_ops(cfg, pair_index, input.width(), input.height());
    let geometric: Vec<AppliedOp> = ops.iter().filter(|o| o.is_geometric()).cloned().collect();
    Ok(AugmentedPair {
        input: apply_ops(input, &ops, Interpolation::Bilinear),
        target: apply_ops(target, &geometric, cfg.target_interpolation),
        applied_ops: ops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |r, c| ((r * 7 + c * 3) % 256) as u8)
    }

    #[test]
    fn zero_probability_is_identity() {
        let cfg = AugmentConfig { probability: 0.0, ..Default::default() };
        let (a, b) = (ramp(32, 32), ramp(32, 32));
        let out = augment_pair(&a, &b, &cfg, 5).unwrap();
        assert!(out.applied_ops.is_empty());
        assert_eq!(out.input, a);
        assert_eq!(out.target, b);
    }

    #[test]
    fn flips_are_involutions() {
        let a = ramp(17, 9);
        for op in [AppliedOp::HFlip, AppliedOp::VFlip] {
            let twice = apply_ops(&a, &[op.clone(), op], Interpolation::Bilinear);
            assert_eq!(twice, a);
        }
    }

    #[test]
    fn shift_moves_content() {
        let mut a = GrayImage::new(8, 8);
        a.set(2, 3, 200);
        let s = apply_ops(&a, &[AppliedOp::HShift { pixels: 2 }, AppliedOp::VShift { pixels: -1 }], Interpolation::Bilinear);
        assert_eq!(s.get(1, 5), 200);
        assert_eq!(s.count_nonzero(), 1);
    }

    #[test]
    fn unit_zoom_and_zero_rotation_are_identity() {
        let a = ramp(16, 16);
        assert_eq!(apply_ops(&a, &[AppliedOp::Zoom { factor: 1.0 }], Interpolation::Bilinear), a);
        assert_eq!(apply_ops(&a, &[AppliedOp::Rotation { degrees: 0.0 }], Interpolation::Bilinear), a);
    }

    #[test]
    fn quarter_rotation_is_counter_clockwise() {
        let mut a = GrayImage::new(9, 9);
        a.set(0, 4, 255); // top center
        let r = apply_ops(&a, &[AppliedOp::Rotation { degrees: 90.0 }], Interpolation::Nearest);
        assert_eq!(r.get(4, 0), 255); // now left center
    }

    #[test]
    fn photometric_ops_clamp() {
        let a = GrayImage::filled(4, 4, 250);
        let b = apply_ops(&a, &[AppliedOp::Brightness { delta: 40.0 }], Interpolation::Bilinear);
        assert!(b.pixels().iter().all(|&v| v == 255));
        let c = apply_ops(&GrayImage::filled(4, 4, 10), &[AppliedOp::Brightness { delta: -40.0 }], Interpolation::Bilinear);
        assert!(c.pixels().iter().all(|&v| v == 0));
    }

    #[test]
    fn shadow_darkens_inside_only() {
        let a = GrayImage::filled(20, 20, 200);
        let quad = [[5.0, 10.0], [10.0, 15.0], [15.0, 10.0], [10.0, 5.0]];
        let s = apply_ops(&a, &[AppliedOp::Shadow { vertices: quad, factor: 0.5 }], Interpolation::Bilinear);
        assert_eq!(s.get(10, 10), 100);
        assert_eq!(s.get(0, 0), 200);
    }

    #[test]
    fn photometric_ops_skip_target() {
        let cfg = AugmentConfig { probability: 1.0, ..Default::default() };
        let a = ramp(32, 32);
        let out = augment_pair(&a, &a, &cfg, 0).unwrap();
        assert_eq!(out.applied_ops.len(), OP_ORDER.len());
        let names: Vec<_> = out.applied_ops.iter().map(|o| o.name()).collect();
        assert_eq!(names, OP_ORDER);
        let geo: Vec<_> = out.applied_ops.iter().filter(|o| o.is_geometric()).cloned().collect();
        assert_eq!(out.target, apply_ops(&a, &geo, Interpolation::Bilinear));
        assert_ne!(out.input, out.target);
    }

    #[test]
    fn config_validation_and_json() {
        assert!(AugmentConfig { probability: 1.5, ..Default::default() }.validate().is_err());
        assert!(AugmentConfig { zoom_range: [0.0, 1.0], ..Default::default() }.validate().is_err());
        let cfg: AugmentConfig = serde_json::from_str(r#"{"probability":0.5,"seed":9}"#).unwrap();
        assert_eq!(cfg.probability, 0.5);
        assert_eq!(cfg.zoom_range, [0.9, 1.1]);
        let back: AugmentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn size_mismatch() {
        assert!(augment_pair(&GrayImage::new(4, 4), &GrayImage::new(4, 5), &AugmentConfig::default(), 0).is_err());
    }

    #[test]
    fn op_log_json() {
        let log = AugmentLog { pair_index: 3, ops: vec![AppliedOp::HFlip, AppliedOp::Zoom { factor: 1.05 }] };
        let s = serde_json::to_string(&log).unwrap();
        assert_eq!(s, r#"{"pair_index":3,"ops":[{"op":"hflip"},{"op":"zoom","factor":1.05}]}"#);
    }
}
