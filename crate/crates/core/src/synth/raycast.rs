use serde::{Deserialize, Serialize};

use super::{Aabb, World};
use crate::error::{Error, Result};
use crate::geometry::{pose_to_matrix, Pose};
use crate::pairing::LIDAR_FRAME;
use crate::pointcloud::{Point, PointCloud};

/// A spinning multi-beam LiDAR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LidarModel {
    pub n_azimuth: usize,
    pub elevations_deg: Vec<f64>,
    pub max_range: f64,
}

impl Default for LidarModel {
    fn default() -> Self {
        LidarModel {
            n_azimuth: 1024,
            elevations_deg: (0..16).map(|i| -15.0 + 2.0 * i as f64).collect(),
            max_range: 120.0,
        }
    }
}

impl LidarModel {
    pub fn validate(&self) -> Result<()> {
        if self.n_azimuth < 4 {
            return Err(Error::InvalidParameter(format!("n_azimuth {} must be >= 4", self.n_azimuth)));
        }
        if !(self.max_range.is_finite() && self.max_range > 0.0) {
            return Err(Error::InvalidParameter(format!("max_range {} must be > 0", self.max_range)));
        }
        if self.elevations_deg.iter().any(|e| !e.is_finite() || e.abs() >= 90.0) {
            return Err(Error::InvalidParameter("elevations must lie in (-90, 90) degrees".into()));
        }
        Ok(())
    }

    /// Unit ray directions in the sensor frame, azimuth-major.
    pub fn directions(&self) -> Vec<[f64; 3]> {
        let mut dirs = Vec::with_capacity(self.n_azimuth * self.elevations_deg.len());
        for i in 0..self.n_azimuth {
            let az = std::f64::consts::TAU * i as f64 / self.n_azimuth as f64;
            let (sa, ca) = az.sin_cos();
            for el in &self.elevations_deg {
                let (se, ce) = el.to_radians().sin_cos();
                dirs.push([ce * ca, ce * sa, se]);
            }
        }
        dirs
    }
}

/// Slab-method entry distance of a ray into a box, if it hits in front of the
/// origin.
pub fn ray_box_entry(origin: [f64; 3], dir: [f64; 3], b: &Aabb) -> Option<f64> {
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for k in 0..3 {
        if dir[k] == 0.0 {
            if origin[k] < b.min[k] || origin[k] > b.max[k] {
                return None;
            }
            continue;
        }
        let inv = 1.0 / dir[k];
        let (mut t0, mut t1) = ((b.min[k] - origin[k]) * inv, (b.max[k] - origin[k]) * inv);
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        t_near = t_near.max(t0);
        t_far = t_far.min(t1);
        if t_near > t_far {
            return None;
        }
    }
    (t_near > 0.0).then_some(t_near)
}

/// Casts every beam of `model` from `pose` and returns the nearest hits in
/// the sensor frame, with the box reflectivity as intensity.
pub fn raycast_scan(world: &World, pose: &Pose, model: &LidarModel) -> Result<PointCloud> {
    model.validate()?;
    let m = pose_to_matrix(pose)?;
    let origin = pose.translation();
    if let Some(i) = world.boxes.iter().position(|b| b.contains_closed(origin)) {
        return Err(Error::PoseInsideObject(i));
    }
    let mut points = Vec::new();
    for d in model.directions() {
        let dw = m.transform_vector(d);
        let mut best: Option<(f64, f64)> = None;
        for b in &world.boxes {
            if let Some(t) = ray_box_entry(origin, dw, b) {
                if t <= model.max_range && best.is_none_or(|(bt, _)| t < bt) {
                    best = Some((t, b.reflectivity));
                }
            }
        }
        if let Some((t, refl)) = best {
            points.push(Point::new(t * d[0], t * d[1], t * d[2], refl));
        }
    }
    PointCloud::new(LIDAR_FRAME, points)
}
