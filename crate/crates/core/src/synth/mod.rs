//! Synthetic box worlds with closed-form ground truth.
//!
//! A world is a set of axis-aligned reflective boxes. Ray casting produces
//! LiDAR scans that go through the real mapping and projection code, while
//! [`analytic_bev`] renders the same scene exactly, so the two can be compared
//! pixel by pixel.

mod analytic;
mod radar;
mod raycast;

pub use analytic::{analytic_bev, analytic_bev_in_frame};
pub use radar::{gaussian_taps, reflect_index, render_radar, RadarModel};
pub use raycast::{ray_box_entry, raycast_scan, LidarModel};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{compose, inverse, pose_to_matrix, AffineMatrix, Pose};
use crate::image::pgm;
use crate::pairing::{
    pcbf, poses, render_ground_truth, PairManifest, PairRecord, PoseTrack, Split, GT_SUBDIR, MANIFEST_NAME,
    RADAR_SUBDIR,
};
use crate::pointcloud::{accumulate_map, PointCloud, VoxelSpec, DEFAULT_CROP_HALF_M};
use crate::projection::BevGridSpec;
use crate::rng::{mix64, SplitMix64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub reflectivity: f64,
}

impl Aabb {
    pub fn new(min: [f64; 3], max: [f64; 3], reflectivity: f64) -> Result<Self> {
        let b = Aabb { min, max, reflectivity };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if (0..3).any(|k| !(self.min[k].is_finite() && self.max[k].is_finite() && self.min[k] < self.max[k])) {
            return Err(Error::InvalidParameter(format!(
                "box {:?}..{:?} must have positive volume",
                self.min, self.max
            )));
        }
        if !(self.reflectivity > 0.0 && self.reflectivity <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "reflectivity {} outside (0, 1]",
                self.reflectivity
            )));
        }
        Ok(())
    }

    pub fn contains_closed(&self, p: [f64; 3]) -> bool {
        (0..3).all(|k| self.min[k] <= p[k] && p[k] <= self.max[k])
    }

    pub fn corners(&self) -> [[f64; 3]; 8] {
        let mut out = [[0.0; 3]; 8];
        for (i, c) in out.iter_mut().enumerate() {
            for k in 0..3 {
                c[k] = if i >> k & 1 == 0 { self.min[k] } else { self.max[k] };
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct World {
    pub bounds: Bounds,
    pub boxes: Vec<Aabb>,
}

impl World {
    pub fn empty() -> Self {
        World {
            bounds: Bounds { min: [-100.0, -100.0, -10.0], max: [100.0, 100.0, 30.0] },
            boxes: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.bounds;
        if (0..3).any(|k| !(b.min[k].is_finite() && b.max[k].is_finite() && b.min[k] < b.max[k])) {
            return Err(Error::InvalidParameter("world bounds must have positive volume".into()));
        }
        for bx in &self.boxes {
            bx.validate()?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let w: World = serde_json::from_str(text).map_err(|e| Error::parse("world JSON", e.to_string()))?;
        w.validate()?;
        Ok(w)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("world serializes")
    }

    pub fn read(path: &Path) -> Result<Self> {
        World::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// A street-like world: boxes on both sides of a clear corridor along the x
/// axis (`|y| < corridor_half_width`), separated from each other by at least
/// `min_gap` meters.
pub fn random_corridor_world(seed: u64, n_boxes: usize, corridor_half_width: f64, min_gap: f64) -> World {
    let mut rng = SplitMix64::keyed(&[seed, 0x5757]);
    let mut world = World::empty();
    let mut attempts = 0;
    while world.boxes.len() < n_boxes && attempts < n_boxes * 200 {
        attempts += 1;
        let sx = rng.uniform(0.3, 2.5);
        let sy = rng.uniform(0.3, 2.5);
        let height = rng.uniform(0.8, 8.0);
        let cx = rng.uniform(-85.0, 85.0);
        let side = if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
        let cy = side * rng.uniform(corridor_half_width + sy / 2.0, 70.0);
        let candidate = Aabb {
            min: [cx - sx / 2.0, cy - sy / 2.0, 0.0],
            max: [cx + sx / 2.0, cy + sy / 2.0, height],
            reflectivity: rng.uniform(0.2, 1.0).max(0.01),
        };
        let clear = world.boxes.iter().all(|b| {
            (0..2).any(|k| candidate.min[k] > b.max[k] + min_gap || b.min[k] > candidate.max[k] + min_gap)
        });
        if clear {
            world.boxes.push(candidate);
        }
    }
    world
}

/// Evenly spaced poses along a heading, one every `period_ns`.
pub fn straight_trajectory(n: usize, start: [f64; 3], step_m: f64, yaw: f64, period_ns: i64) -> Vec<Pose> {
    let (s, c) = yaw.sin_cos();
    (0..n)
        .map(|i| {
            let d = step_m * i as f64;
            Pose::new(i as i64 * period_ns, [start[0] + c * d, start[1] + s * d, start[2]], [0.0, 0.0, yaw])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub lidar: LidarModel,
    pub radar: RadarModel,
    /// LiDAR-to-radar transform.
    pub extrinsic: AffineMatrix,
    pub grid: BevGridSpec,
    pub voxel: VoxelSpec,
    pub crop_half: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            lidar: LidarModel::default(),
            radar: RadarModel::default(),
            extrinsic: AffineMatrix::IDENTITY,
            grid: BevGridSpec::default(),
            voxel: VoxelSpec::default(),
            crop_half: DEFAULT_CROP_HALF_M,
        }
    }
}

pub const SCANS_SUBDIR: &str = "scans";
pub const ANALYTIC_SUBDIR: &str = "analytic";
pub const POSES_NAME: &str = "poses.csv";
pub const MAP_NAME: &str = "map.pcbf";

#[derive(Debug, Clone, PartialEq)]
pub struct FrameAgreement {
    pub timestamp_ns: i64,
    /// Fraction of pixels where pipeline and analytic truth differ by at most
    /// one gray level.
    pub within_one: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutcome {
    pub manifest: PairManifest,
    pub map_points: usize,
    pub agreement: Vec<FrameAgreement>,
}

/// Fraction of pixels whose values differ by at most `tol`.
pub fn agreement_fraction(a: &crate::image::GrayImage, b: &crate::image::GrayImage, tol: u8) -> Result<f64> {
    a.same_shape(b)?;
    let n = a.pixels().len().max(1);
    let ok = a.pixels().iter().zip(b.pixels()).filter(|(x, y)| x.abs_diff(**y) <= tol).count();
    Ok(ok as f64 / n as f64)
}

fn mkdir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).map_err(|e| Error::io(p, e))
}

fn write(p: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(p, bytes).map_err(|e| Error::io(p, e))
}

/// Runs the full data-generation chain on a synthetic world.
///
/// Per pose: ray-cast a scan. The scans are accumulated into a map with the
/// real mapping code, and each pose's ground truth is cut from that map. The
/// analytic raster of the same view is stored alongside, and the radar input
/// is the analytic raster degraded by [`render_radar`]. Layout under
/// `out_dir`: `scans/`, `poses.csv`, `map.pcbf`, `radar/`, `gt/`,
/// `analytic/`, `manifest.jsonl`.
pub fn generate_dataset(world: &World, trajectory: &PoseTrack, opts: &SynthOptions, out_dir: &Path) -> Result<SynthOutcome> {
    world.validate()?;
    opts.grid.validate()?;
    opts.radar.validate()?;
    let scan_dir = out_dir.join(SCANS_SUBDIR);
    let radar_dir = out_dir.join(RADAR_SUBDIR);
    let gt_dir = out_dir.join(GT_SUBDIR);
    let analytic_dir = out_dir.join(ANALYTIC_SUBDIR);
    for d in [&scan_dir, &radar_dir, &gt_dir, &analytic_dir] {
        mkdir(d)?;
    }

    let mut scans: Vec<(PointCloud, Pose)> = Vec::with_capacity(trajectory.len());
    for pose in trajectory.poses() {
        let scan = raycast_scan(world, pose, &opts.lidar)?;
        write(&scan_dir.join(format!("{}.pcbf", pose.timestamp_ns)), &pcbf::encode(&scan))?;
        scans.push((scan, *pose));
    }
    let mut csv = Vec::new();
    poses::write(&mut csv, trajectory.poses())?;
    write(&out_dir.join(POSES_NAME), &csv)?;

    let map = accumulate_map(&scans, &opts.voxel)?;
    write(&out_dir.join(MAP_NAME), &pcbf::encode(&map))?;

    let lidar_from_radar = inverse(&opts.extrinsic);
    let mut manifest = PairManifest::new(opts.grid);
    let mut agreement = Vec::with_capacity(trajectory.len());
    for (index, pose) in trajectory.poses().iter().enumerate() {
        let radar_to_world = compose(&pose_to_matrix(pose)?, &lidar_from_radar);
        let truth = analytic_bev_in_frame(world, &radar_to_world, &opts.grid)?;
        let gt = render_ground_truth(&map, pose, &opts.extrinsic, &opts.grid, opts.crop_half, opts.crop_half)?;
        let radar_model = RadarModel { seed: mix64(opts.radar.seed ^ mix64(index as u64)), ..opts.radar.clone() };
        let radar = render_radar(&truth, &radar_model)?;

        let name = format!("{}.pgm", pose.timestamp_ns);
        write(&radar_dir.join(&name), &pgm::encode(&radar.image))?;
        write(&gt_dir.join(&name), &pgm::encode(&gt.image))?;
        write(&analytic_dir.join(&name), &pgm::encode(&truth.image))?;
        agreement.push(FrameAgreement {
            timestamp_ns: pose.timestamp_ns,
            within_one: agreement_fraction(&gt.image, &truth.image, 1)?,
        });
        manifest.records.push(PairRecord {
            radar_path: format!("{RADAR_SUBDIR}/{name}"),
            gt_path: format!("{GT_SUBDIR}/{name}"),
            timestamp_ns: pose.timestamp_ns,
            pose: *pose,
            split: Split::Train,
            gt_empty: gt.image.count_nonzero() == 0,
        });
    }
    manifest.write(&out_dir.join(MANIFEST_NAME))?;
    Ok(SynthOutcome { manifest, map_points: map.len(), agreement })
}
