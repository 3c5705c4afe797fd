//! Full-reference quality metrics for 8-bit grayscale images.
//!
//! All arithmetic is carried out in `f64`.

mod report;

pub use report::{evaluate_pairs, format_table, Evaluation, MetricReport, PairMetrics};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::image::GrayImage;

pub const PEAK: f64 = 255.0;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

pub const RMI_RADIUS: usize = 3;
pub const RMI_EPSILON: f64 = 1e-8;

/// Identifies the RMI estimator so reports are only compared like-for-like.
pub const RMI_VARIANT: &str = "gaussian-logdet-v1";

pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    a.same_shape(b)?;
    if a.pixels().is_empty() {
        return Err(Error::TooSmall("empty image".into()));
    }
    let sum: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(sum / a.pixels().len() as f64)
}

/// Peak signal-to-noise ratio in dB; `f64::INFINITY` for identical images.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    let mse = mse(a, b)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (PEAK * PEAK / mse).log10())
}

fn gaussian_kernel_1d(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size / 2) as f64;
    let w: Vec<f64> = (0..size)
        .map(|i| (-((i as f64 - c).powi(2)) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Valid-region separable filtering of a `w x h` plane.
fn filter_valid(plane: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let (ow, oh) = (w - n + 1, h - n + 1);
    let mut horiz = vec![0.0; ow * h];
    for r in 0..h {
        let row = &plane[r * w..(r + 1) * w];
        for c in 0..ow {
            horiz[r * ow + c] = row[c..c + n].iter().zip(k).map(|(x, y)| x * y).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = (0..n).map(|i| horiz[(r + i) * ow + c] * k[i]).sum();
        }
    }
    out
}

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
/// L = 255, over the valid region only.
pub fn ssim(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    a.same_shape(b)?;
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::TooSmall(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {w}x{h}"
        )));
    }
    let k = gaussian_kernel_1d(SSIM_WINDOW, SSIM_SIGMA);
    let fa: Vec<f64> = a.pixels().iter().map(|&v| v as f64).collect();
    let fb: Vec<f64> = b.pixels().iter().map(|&v| v as f64).collect();
    let prod = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).collect::<Vec<_>>();
    let mu_a = filter_valid(&fa, w, h, &k);
    let mu_b = filter_valid(&fb, w, h, &k);
    let aa = filter_valid(&prod(&fa, &fa), w, h, &k);
    let bb = filter_valid(&prod(&fb, &fb), w, h, &k);
    let ab = filter_valid(&prod(&fa, &fb), w, h, &k);
    let c1 = (SSIM_K1 * PEAK).powi(2);
    let c2 = (SSIM_K2 * PEAK).powi(2);
    let total: f64 = (0..mu_a.len())
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = aa[i] - ma * ma;
            let vb = bb[i] - mb * mb;
            let cov = ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .sum();
    Ok(total / mu_a.len() as f64)
}

fn log_det_spd(m: DMatrix<f64>) -> f64 {
    match m.clone().cholesky() {
        Some(ch) => 2.0 * ch.l().diagonal().iter().map(|d| d.ln()).sum::<f64>(),
        None => m
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|&l| l.max(f64::MIN_POSITIVE).ln())
            .sum(),
    }
}

/// Regional mutual information in nats.
///
/// Each interior pixel contributes the `(2r+1)^2` neighborhood of both images
/// (gray levels scaled to `[0, 1]`). Entropies are taken under a Gaussian model,
/// so the result is `0.5 * (ln|Sa| + ln|Sb| - ln|Sab|)` with `epsilon * I`
/// added to each covariance. Negative values are clamped to zero.
pub fn rmi(a: &GrayImage, b: &GrayImage, radius: usize, epsilon: f64) -> Result<f64> {
    a.same_shape(b)?;
    let (w, h) = (a.width(), a.height());
    let side = 2 * radius + 1;
    if w < side || h < side {
        return Err(Error::TooSmall(format!(
            "RMI radius {radius} needs at least {side}x{side}, got {w}x{h}"
        )));
    }
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} must be >= 0")));
    }
    let d = side * side;
    let dim = 2 * d;
    let (ow, oh) = (w - side + 1, h - side + 1);
    let n = (ow * oh) as f64;

    let gather = |r: usize, c: usize, out: &mut [f64]| {
        let mut k = 0;
        for dr in 0..side {
            for dc in 0..side {
                out[k] = a.get(r + dr, c + dc) as f64 / PEAK;
                out[d + k] = b.get(r + dr, c + dc) as f64 / PEAK;
                k += 1;
            }
        }
    };

    let mut v = vec![0.0; dim];
    let mut mean = vec![0.0; dim];
    for r in 0..oh {
        for c in 0..ow {
            gather(r, c, &mut v);
            mean.iter_mut().zip(&v).for_each(|(m, x)| *m += x);
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);

    let mut cov = vec![0.0; dim * dim];
    for r in 0..oh {
        for c in 0..ow {
            gather(r, c, &mut v);
            v.iter_mut().zip(&mean).for_each(|(x, m)| *x -= m);
            for i in 0..dim {
                let vi = v[i];
                if vi == 0.0 {
                    continue;
                }
                let row = &mut cov[i * dim..(i + 1) * dim];
                for j in i..dim {
                    row[j] += vi * v[j];
                }
            }
        }
    }
    let joint = DMatrix::from_fn(dim, dim, |i, j| {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        cov[lo * dim + hi] / n + if i == j { epsilon } else { 0.0 }
    });
    let la = log_det_spd(joint.view((0, 0), (d, d)).into_owned());
    let lb = log_det_spd(joint.view((d, d), (d, d)).into_owned());
    let lab = log_det_spd(joint);
    Ok((0.5 * (la + lb - lab)).max(0.0))
}

/// [`rmi`] with the default radius and epsilon.
pub fn rmi_default(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    rmi(a, b, RMI_RADIUS, RMI_EPSILON)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise(w: usize, h: usize, seed: u64) -> GrayImage {
        let mut s = seed;
        GrayImage::from_fn(w, h, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 56) as u8
        })
    }

    #[test]
    fn psnr_edge_cases() {
        let z = GrayImage::new(16, 16);
        let f = GrayImage::filled(16, 16, 255);
        assert_eq!(psnr(&z, &z).unwrap(), f64::INFINITY);
        assert_eq!(psnr(&z, &f).unwrap(), 0.0);
        assert!(psnr(&z, &GrayImage::new(16, 15)).is_err());
    }

    #[test]
    fn ssim_identity_and_constants() {
        let a = noise(32, 32, 3);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let c1 = (0.01f64 * 255.0).powi(2);
        let v = ssim(&GrayImage::new(20, 20), &GrayImage::filled(20, 20, 255)).unwrap();
        let want = c1 / (255.0 * 255.0 + c1);
        assert!((v - want).abs() < 1e-12, "{v} vs {want}");
        assert!(ssim(&GrayImage::new(10, 20), &GrayImage::new(10, 20)).is_err());
    }

    #[test]
    fn rmi_constant_image_is_zero() {
        let c = GrayImage::filled(24, 24, 90);
        let r = noise(24, 24, 9);
        assert!(rmi(&c, &r, 3, 1e-8).unwrap() <= 1e-6);
        assert!(rmi(&c, &r, 0, 1e-8).unwrap() <= 1e-6);
    }

    #[test]
    fn rmi_radius_zero_self_information_closed_form() {
        let a = noise(20, 20, 5);
        let eps = 1e-8;
        let vals: Vec<f64> = a.pixels().iter().map(|&v| v as f64 / 255.0).collect();
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / vals.len() as f64;
        let want = 0.5 * ((var + eps).powi(2) / (2.0 * var * eps + eps * eps)).ln();
        let got = rmi(&a, &a, 0, eps).unwrap();
        assert!((got - want).abs() < 1e-6 * want, "{got} vs {want}");
        assert!(got >= rmi(&a, &noise(20, 20, 6), 0, eps).unwrap());
    }

    #[test]
    fn rmi_shape_errors() {
        assert!(rmi(&GrayImage::new(6, 6), &GrayImage::new(6, 6), 3, 1e-8).is_err());
        assert!(rmi(&GrayImage::new(8, 8), &GrayImage::new(8, 9), 0, 1e-8).is_err());
    }
}
