//! Independent reference implementations shared by the integration tests.
//!
//! These are deliberately slow and literal: nested loops, no shared helpers
//! with the library beyond its plain data types.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use radar_gt::geometry::{AffineMatrix, Pose};
use radar_gt::image::GrayImage;
use radar_gt::pointcloud::{Point, PointCloud};

pub fn random_pose<R: Rng>(rng: &mut R, ts: i64) -> Pose {
    use std::f64::consts::PI;
    Pose::new(
        ts,
        [rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0), rng.random_range(-5.0..5.0)],
        [rng.random_range(-PI..PI), rng.random_range(-1.5..1.5), rng.random_range(-PI..PI)],
    )
}

pub fn random_cloud<R: Rng>(rng: &mut R, frame: &str, n: usize, half: f64) -> PointCloud {
    let points = (0..n)
        .map(|_| {
            Point::new(
                rng.random_range(-half..half),
                rng.random_range(-half..half),
                rng.random_range(-5.0..5.0),
                rng.random_range(0.0..=1.0),
            )
        })
        .collect();
    PointCloud::new(frame, points).unwrap()
}

pub fn random_image<R: Rng>(rng: &mut R, w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.random())
}

/// Row-major 4x4 product by the textbook triple loop.
pub fn matmul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn apply(m: &AffineMatrix, p: [f64; 3]) -> [f64; 3] {
    let r = m.rows();
    let h = [p[0], p[1], p[2], 1.0];
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        for k in 0..4 {
            *o += r[i][k] * h[k];
        }
    }
    out
}

/// Brute-force voxel binning. Returns `(voxel, centroid xyz, mean intensity)`
/// sorted by voxel key.
pub fn voxel_oracle(points: &[Point], leaf: [f64; 3]) -> Vec<([i64; 3], [f64; 3], f64)> {
    let key = |p: &Point| {
        [
            (p.x / leaf[0]).floor() as i64,
            (p.y / leaf[1]).floor() as i64,
            (p.z / leaf[2]).floor() as i64,
        ]
    };
    let mut keys: Vec<[i64; 3]> = Vec::new();
    for p in points {
        let k = key(p);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.sort();
    keys.into_iter()
        .map(|k| {
            let members: Vec<&Point> = points.iter().filter(|p| key(p) == k).collect();
            let n = members.len() as f64;
            let c = [
                members.iter().map(|p| p.x).sum::<f64>() / n,
                members.iter().map(|p| p.y).sum::<f64>() / n,
                members.iter().map(|p| p.z).sum::<f64>() / n,
            ];
            (k, c, members.iter().map(|p| p.intensity).sum::<f64>() / n)
        })
        .collect()
}

/// Checks a library voxel output against the oracle: same voxel set, centroid
/// and intensity within `tol`.
pub fn voxel_matches(out: &PointCloud, points: &[Point], leaf: [f64; 3], tol: f64) -> Result<(), String> {
    let want = voxel_oracle(points, leaf);
    if want.len() != out.len() {
        return Err(format!("voxel count {} != oracle {}", out.len(), want.len()));
    }
    let mut got: Vec<&Point> = out.points().iter().collect();
    // Each centroid lies in its own voxel, so sorting by key aligns the lists.
    let key = |p: &Point| {
        [(p.x / leaf[0]).floor() as i64, (p.y / leaf[1]).floor() as i64, (p.z / leaf[2]).floor() as i64]
    };
    got.sort_by_key(|p| key(p));
    for (g, (k, c, i)) in got.iter().zip(&want) {
        let d = (g.x - c[0]).abs().max((g.y - c[1]).abs()).max((g.z - c[2]).abs());
        if d > tol || (g.intensity - i).abs() > tol {
            return Err(format!("voxel {k:?}: got {g:?}, want {c:?} / {i}"));
        }
    }
    Ok(())
}

/// Per-pixel max-z raster: bucket every point by its pixel footprint, then
/// pick the winner of each bucket by scanning all its members.
pub fn projection_oracle(points: &[Point], size: usize, span: f64) -> Vec<u8> {
    let res = span / size as f64;
    let half = span / 2.0;
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        let row = ((half - p.x) / res).floor() as i64;
        let col = ((half - p.y) / res).floor() as i64;
        assert!((0..size as i64).contains(&row) && (0..size as i64).contains(&col), "oracle input off grid");
        buckets.entry((row, col)).or_default().push(i);
    }
    let mut img = vec![0u8; size * size];
    for ((row, col), members) in buckets {
        let mut best = members[0];
        for &i in &members[1..] {
            let (p, b) = (&points[i], &points[best]);
            if p.z > b.z || (p.z == b.z && p.intensity > b.intensity) {
                best = i;
            }
        }
        img[row as usize * size + col as usize] = (255.0 * points[best].intensity).round() as u8;
    }
    img
}

pub fn psnr_oracle(a: &GrayImage, b: &GrayImage) -> f64 {
    let mut sum = 0.0;
    for r in 0..a.height() {
        for c in 0..a.width() {
            let d = a.get(r, c) as f64 - b.get(r, c) as f64;
            sum += d * d;
        }
    }
    let mse = sum / (a.width() * a.height()) as f64;
    10.0 * (255.0f64 * 255.0 / mse).log10()
}

/// SSIM computed window by window with a full 2D Gaussian.
pub fn ssim_oracle(a: &GrayImage, b: &GrayImage) -> f64 {
    let n = 11;
    let sigma: f64 = 1.5;
    let mut w = vec![vec![0.0; n]; n];
    let mut total = 0.0;
    for (i, row) in w.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
            *v = (-(di * di + dj * dj) / (2.0 * sigma * sigma)).exp();
            total += *v;
        }
    }
    let c1 = (0.01f64 * 255.0).powi(2);
    let c2 = (0.03f64 * 255.0).powi(2);
    let mut acc = 0.0;
    let mut count = 0;
    for r0 in 0..=a.height() - n {
        for c0 in 0..=a.width() - n {
            let (mut ma, mut mb) = (0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    let k = w[i][j] / total;
                    ma += k * a.get(r0 + i, c0 + j) as f64;
                    mb += k * b.get(r0 + i, c0 + j) as f64;
                }
            }
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    let k = w[i][j] / total;
                    let da = a.get(r0 + i, c0 + j) as f64 - ma;
                    let db = b.get(r0 + i, c0 + j) as f64 - mb;
                    va += k * da * da;
                    vb += k * db * db;
                    cov += k * da * db;
                }
            }
            acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1;
        }
    }
    acc / count as f64
}

/// Plug-in mutual information (nats) of the joint gray-level histogram.
pub fn histogram_mi(a: &GrayImage, b: &GrayImage) -> f64 {
    let n = a.pixels().len() as f64;
    let mut joint: HashMap<(u8, u8), f64> = HashMap::new();
    let mut pa: HashMap<u8, f64> = HashMap::new();
    let mut pb: HashMap<u8, f64> = HashMap::new();
    for (&x, &y) in a.pixels().iter().zip(b.pixels()) {
        *joint.entry((x, y)).or_default() += 1.0 / n;
        *pa.entry(x).or_default() += 1.0 / n;
        *pb.entry(y).or_default() += 1.0 / n;
    }
    joint.iter().map(|(&(x, y), &p)| p * (p / (pa[&x] * pb[&y])).ln()).sum()
}

/// Straight 2D convolution with reflected borders (`... b a | a b ...`).
pub fn convolve_reflect(img: &GrayImage, kernel_1d: &[f64]) -> Vec<f64> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let r = (kernel_1d.len() / 2) as i64;
    let reflect = |i: i64, n: i64| {
        let mut i = i;
        loop {
            if i < 0 {
                i = -i - 1;
            } else if i >= n {
                i = 2 * n - i - 1;
            } else {
                return i as usize;
            }
        }
    };
    let mut out = vec![0.0; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    let k = kernel_1d[(dy + r) as usize] * kernel_1d[(dx + r) as usize];
                    s += k * img.get(reflect(y + dy, h), reflect(x + dx, w)) as f64;
                }
            }
            out[(y * w + x) as usize] = s;
        }
    }
    out
}
