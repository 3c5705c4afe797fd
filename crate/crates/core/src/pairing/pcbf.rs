//! PCBF point-cloud files.
//!
//! Little-endian layout: magic `PCBF`, `u32` version (1), `u64` point count,
//! then `count` records of four `f32` values `(x, y, z, intensity)`.
//!
//! On read, intensities outside `[0, 1]` trigger a per-file min-max
//! normalization. Files whose intensities are all equal (so min-max is
//! undefined) are clamped into range instead. NaN or infinite values are
//! rejected.

use std::path::Path;

use crate::error::{Error, Result};
use crate::pointcloud::{Point, PointCloud};

pub const MAGIC: &[u8; 4] = b"PCBF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;
pub const RECORD_LEN: usize = 16;

const WHAT: &str = "PCBF";

pub fn encode(cloud: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * cloud.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(cloud.len() as u64).to_le_bytes());
    for p in cloud.points() {
        for v in [p.x, p.y, p.z, p.intensity] {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8], frame_id: &str) -> Result<PointCloud> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::parse(WHAT, format!("header truncated ({} bytes)", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::parse(WHAT, "bad magic"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::parse(WHAT, format!("unsupported version {version}")));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let body = &bytes[HEADER_LEN..];
    let expected = usize::try_from(count)
        .ok()
        .and_then(|c| c.checked_mul(RECORD_LEN))
        .ok_or_else(|| Error::parse(WHAT, format!("point count {count} is too large")))?;
    if body.len() != expected {
        return Err(Error::parse(
            WHAT,
            format!("{count} points need {expected} bytes, found {}", body.len()),
        ));
    }
    let mut raw: Vec<[f64; 4]> = Vec::with_capacity(body.len() / RECORD_LEN);
    for (i, rec) in body.chunks_exact(RECORD_LEN).enumerate() {
        let mut vals = [0.0; 4];
        for (k, v) in vals.iter_mut().enumerate() {
            let f = f32::from_le_bytes(rec[4 * k..4 * k + 4].try_into().unwrap());
            if !f.is_finite() {
                return Err(Error::InvalidPoint(format!("point {i} has non-finite value {f}")));
            }
            *v = f as f64;
        }
        raw.push(vals);
    }
    normalize_intensities(&mut raw);
    let points = raw.into_iter().map(|[x, y, z, i]| Point::new(x, y, z, i)).collect();
    PointCloud::new(frame_id, points)
}

fn normalize_intensities(raw: &mut [[f64; 4]]) {
    let (lo, hi) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r[3]), hi.max(r[3])));
    if raw.is_empty() || (lo >= 0.0 && hi <= 1.0) {
        return;
    }
    let range = hi - lo;
    for r in raw.iter_mut() {
        r[3] = if range > 0.0 { ((r[3] - lo) / range).clamp(0.0, 1.0) } else { r[3].clamp(0.0, 1.0) };
    }
}

pub fn read(path: &Path, frame_id: &str) -> Result<PointCloud> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, frame_id)
}

pub fn write(path: &Path, cloud: &PointCloud) -> Result<()> {
    std::fs::write(path, encode(cloud)).map_err(|e| Error::io(path, e))
}
