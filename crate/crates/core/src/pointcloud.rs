//! Point clouds, voxel-grid downsampling, map accumulation and box cropping.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{pose_to_matrix, AffineMatrix, Pose};

pub const MAP_FRAME: &str = "map";

/// Default voxel leaf edge in meters.
pub const DEFAULT_LEAF_M: f64 = 0.8;

/// Default crop half extent in meters (a 200 m x 200 m box).
pub const DEFAULT_CROP_HALF_M: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Normalized return strength in `[0, 1]`.
    pub intensity: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64, z: f64, intensity: f64) -> Self {
        Point { x, y, z, intensity }
    }

    #[inline]
    pub fn xyz(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    fn check(&self, index: usize) -> Result<()> {
        if !(self.x.is_finite() && self.y.is_finite() && self.z.is_finite()) {
            return Err(Error::InvalidPoint(format!(
                "point {index} has non-finite coordinates ({}, {}, {})",
                self.x, self.y, self.z
            )));
        }
        if !(0.0..=1.0).contains(&self.intensity) {
            return Err(Error::InvalidPoint(format!(
                "point {index} has intensity {} outside [0, 1]",
                self.intensity
            )));
        }
        Ok(())
    }
}

/// A set of points in a named coordinate frame.
///
/// Construction validates every point, so a `PointCloud` never holds NaN or
/// infinite coordinates or intensities outside `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    frame_id: String,
    points: Vec<Point>,
}

impl PointCloud {
    pub fn new(frame_id: impl Into<String>, points: Vec<Point>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            p.check(i)?;
        }
        Ok(PointCloud { frame_id: frame_id.into(), points })
    }

    pub fn empty(frame_id: impl Into<String>) -> Self {
        PointCloud { frame_id: frame_id.into(), points: Vec::new() }
    }

    pub fn frame_id(&self) -> &str {
        &self.frame_id
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn with_frame(mut self, frame_id: impl Into<String>) -> Self {
        self.frame_id = frame_id.into();
        self
    }

    /// Applies a rigid transform to every point. Intensities are unchanged.
    pub fn transformed(&self, m: &AffineMatrix, frame_id: impl Into<String>) -> PointCloud {
        let points = self
            .points
            .iter()
            .map(|p| {
                let [x, y, z] = m.transform_point(p.xyz());
                Point::new(x, y, z, p.intensity)
            })
            .collect();
        PointCloud { frame_id: frame_id.into(), points }
    }

    /// Keeps the points matching `keep`, preserving order.
    pub fn filtered(&self, mut keep: impl FnMut(&Point) -> bool) -> PointCloud {
        PointCloud {
            frame_id: self.frame_id.clone(),
            points: self.points.iter().filter(|p| keep(p)).copied().collect(),
        }
    }

    /// Axis-aligned bounds `(min, max)`, or `None` for an empty cloud.
    pub fn extent(&self) -> Option<([f64; 3], [f64; 3])> {
        let first = self.points.first()?;
        let mut lo = first.xyz();
        let mut hi = lo;
        for p in &self.points[1..] {
            for (k, v) in p.xyz().into_iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        Some((lo, hi))
    }
}

/// Voxel leaf sizes in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoxelSpec {
    leaf: [f64; 3],
}

impl VoxelSpec {
    pub fn new(leaf_x: f64, leaf_y: f64, leaf_z: f64) -> Result<Self> {
        for v in [leaf_x, leaf_y, leaf_z] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("voxel leaf size {v} must be > 0")));
            }
        }
        Ok(VoxelSpec { leaf: [leaf_x, leaf_y, leaf_z] })
    }

    pub fn cube(leaf: f64) -> Result<Self> {
        VoxelSpec::new(leaf, leaf, leaf)
    }

    pub fn leaf(&self) -> [f64; 3] {
        self.leaf
    }

    /// Integer voxel coordinates `floor(p / leaf)` per axis.
    #[inline]
    pub fn voxel_index(&self, p: &Point) -> [i64; 3] {
        [
            (p.x / self.leaf[0]).floor() as i64,
            (p.y / self.leaf[1]).floor() as i64,
            (p.z / self.leaf[2]).floor() as i64,
        ]
    }
}

impl Default for VoxelSpec {
    fn default() -> Self {
        VoxelSpec { leaf: [DEFAULT_LEAF_M; 3] }
    }
}

#[derive(Default)]
struct VoxelAccum {
    sum: [f64; 4],
    count: usize,
}

/// Replaces the points of each occupied voxel by their centroid and mean
/// intensity. Output is ordered by voxel index (z, then y, then x).
pub fn voxel_filter(cloud: &PointCloud, spec: &VoxelSpec) -> PointCloud {
    let mut bins: BTreeMap<(i64, i64, i64), VoxelAccum> = BTreeMap::new();
    for p in &cloud.points {
        let [ix, iy, iz] = spec.voxel_index(p);
        let acc = bins.entry((iz, iy, ix)).or_default();
        acc.sum[0] += p.x;
        acc.sum[1] += p.y;
        acc.sum[2] += p.z;
        acc.sum[3] += p.intensity;
        acc.count += 1;
    }
    let points = bins
        .into_values()
        .map(|acc| {
            let n = acc.count as f64;
            Point::new(
                acc.sum[0] / n,
                acc.sum[1] / n,
                acc.sum[2] / n,
                (acc.sum[3] / n).clamp(0.0, 1.0),
            )
        })
        .collect();
    PointCloud { frame_id: cloud.frame_id.clone(), points }
}

/// Downsamples each scan, moves it into the global frame with its pose and
/// concatenates the results in input order.
pub fn accumulate_map(scans: &[(PointCloud, Pose)], spec: &VoxelSpec) -> Result<PointCloud> {
    let Some((first, _)) = scans.first() else {
        return Err(Error::EmptyInput("no scans to accumulate".into()));
    };
    let frame = first.frame_id();
    let mut points = Vec::new();
    for (scan, pose) in scans {
        if scan.frame_id() != frame {
            return Err(Error::FrameMismatch {
                expected: frame.to_string(),
                found: scan.frame_id().to_string(),
            });
        }
        let m = pose_to_matrix(pose)?;
        let local = voxel_filter(scan, spec);
        points.extend(local.transformed(&m, MAP_FRAME).points);
    }
    Ok(PointCloud { frame_id: MAP_FRAME.to_string(), points })
}

/// Vertical extent kept by [`crop_box`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZRange {
    /// Keep every height: the full z range of the map.
    #[default]
    Full,
    /// Keep `lo < z <= hi`.
    Between { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CropSpec {
    pub center: [f64; 3],
    pub half_extent_x: f64,
    pub half_extent_y: f64,
    pub z_mode: ZRange,
}

impl CropSpec {
    pub fn new(center: [f64; 3], half_extent_x: f64, half_extent_y: f64) -> Result<Self> {
        for h in [half_extent_x, half_extent_y] {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidParameter(format!("crop half extent {h} must be > 0")));
            }
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("crop center must be finite".into()));
        }
        Ok(CropSpec { center, half_extent_x, half_extent_y, z_mode: ZRange::Full })
    }

    /// The default 200 m x 200 m full-height box around `center`.
    pub fn around(center: [f64; 3]) -> Self {
        CropSpec {
            center,
            half_extent_x: DEFAULT_CROP_HALF_M,
            half_extent_y: DEFAULT_CROP_HALF_M,
            z_mode: ZRange::Full,
        }
    }

    /// Half-open containment: `center - h < v <= center + h` on x and y.
    #[inline]
    pub fn contains(&self, p: &Point) -> bool {
        let within = |v: f64, c: f64, h: f64| c - h < v && v <= c + h;
        within(p.x, self.center[0], self.half_extent_x)
            && within(p.y, self.center[1], self.half_extent_y)
            && match self.z_mode {
                ZRange::Full => true,
                ZRange::Between { lo, hi } => lo < p.z && p.z <= hi,
            }
    }
}

pub fn crop_box(map: &PointCloud, spec: &CropSpec) -> PointCloud {
    map.filtered(|p| spec.contains(p))
}
