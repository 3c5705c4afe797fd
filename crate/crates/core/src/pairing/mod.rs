//! Dataset ingestion and radar / ground-truth pair generation.

pub mod manifest;
pub mod pcbf;
pub mod poses;

use std::path::{Path, PathBuf};

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{compose, inverse, pose_to_matrix, AffineMatrix, Pose};
use crate::image::{self, pgm, GrayImage};
use crate::pointcloud::{accumulate_map, crop_box, CropSpec, PointCloud, VoxelSpec, DEFAULT_CROP_HALF_M};
use crate::projection::{project_bev, to_radar_frame, BevGridSpec, BevImage};

pub use manifest::{PairManifest, PairRecord, Split};

/// Default maximum radar-to-pose timestamp gap (500 ms).
pub const DEFAULT_MAX_GAP_NS: i64 = 500_000_000;

pub const LIDAR_FRAME: &str = "lidar";

/// Poses sorted strictly ascending by timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseTrack {
    poses: Vec<Pose>,
}

impl PoseTrack {
    pub fn new(poses: Vec<Pose>) -> Result<Self> {
        if poses.is_empty() {
            return Err(Error::EmptyInput("pose track has no poses".into()));
        }
        for p in &poses {
            p.validate()?;
        }
        if let Some(w) = poses.windows(2).find(|w| w[1].timestamp_ns <= w[0].timestamp_ns) {
            return Err(Error::InvalidParameter(format!(
                "pose timestamps not strictly increasing: {} then {}",
                w[0].timestamp_ns, w[1].timestamp_ns
            )));
        }
        Ok(PoseTrack { poses })
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        PoseTrack::new(poses::read(path)?)
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

/// The pose closest in time to `query_ns`; an exact midpoint picks the
/// earlier pose.
pub fn nearest_pose(track: &PoseTrack, query_ns: i64, max_gap_ns: i64) -> Result<Pose> {
    if max_gap_ns <= 0 {
        return Err(Error::InvalidParameter(format!("max gap {max_gap_ns} must be > 0")));
    }
    let poses = &track.poses;
    let after = poses.partition_point(|p| p.timestamp_ns < query_ns);
    let gap = |p: &Pose| (i128::from(p.timestamp_ns) - i128::from(query_ns)).unsigned_abs();
    let best = match (after.checked_sub(1).map(|i| &poses[i]), poses.get(after)) {
        (Some(before), Some(next)) => {
            if gap(before) <= gap(next) {
                before
            } else {
                next
            }
        }
        (Some(before), None) => before,
        (None, Some(next)) => next,
        (None, None) => unreachable!("pose track is non-empty"),
    };
    let g = gap(best);
    if g > max_gap_ns as u128 {
        return Err(Error::GapExceeded {
            query_ns,
            gap_ns: i64::try_from(g).unwrap_or(i64::MAX),
            max_gap_ns,
        });
    }
    Ok(*best)
}

/// Files in `dir` whose stem is a non-negative integer timestamp and whose
/// extension is one of `extensions`, sorted by timestamp then name.
pub fn list_timestamped_files(dir: &Path, extensions: &[&str]) -> Result<Vec<(PathBuf, i64)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext_ok = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| extensions.iter().any(|x| x.eq_ignore_ascii_case(e)));
        if !ext_ok || !path.is_file() {
            continue;
        }
        match path.file_stem().and_then(|s| s.to_str()).and_then(|s| s.parse::<i64>().ok()) {
            Some(ts) if ts >= 0 => out.push((path, ts)),
            _ => log::debug!("ignoring {}: stem is not a timestamp", path.display()),
        }
    }
    out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MapStats {
    pub points: usize,
    pub scans_used: usize,
    pub scans_skipped: usize,
    pub extent_min: Option<[f64; 3]>,
    pub extent_max: Option<[f64; 3]>,
}

/// Loads PCBF scans, looks up each scan's pose and accumulates the map.
/// Scans without a pose within `max_gap_ns` are skipped with a warning.
pub fn build_map_from_files(
    scans: &[(PathBuf, i64)],
    track: &PoseTrack,
    voxel: &VoxelSpec,
    max_gap_ns: i64,
) -> Result<(PointCloud, MapStats)> {
    if scans.is_empty() {
        return Err(Error::EmptyInput("no scans found".into()));
    }
    let mut posed = Vec::with_capacity(scans.len());
    let mut skipped = 0;
    for (path, ts) in scans {
        let pose = match nearest_pose(track, *ts, max_gap_ns) {
            Ok(p) => p,
            Err(e) => {
                warn!("skipping scan {}: {e}", path.display());
                skipped += 1;
                continue;
            }
        };
        posed.push((pcbf::read(path, LIDAR_FRAME)?, pose));
    }
    if posed.is_empty() {
        return Err(Error::EmptyInput("no scan has a pose within the allowed gap".into()));
    }
    let map = accumulate_map(&posed, voxel)?;
    let extent = map.extent();
    let stats = MapStats {
        points: map.len(),
        scans_used: posed.len(),
        scans_skipped: skipped,
        extent_min: extent.map(|e| e.0),
        extent_max: extent.map(|e| e.1),
    };
    Ok((map, stats))
}

/// Options for [`build_pairs`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingOptions {
    pub max_gap_ns: i64,
    pub crop_half_x: f64,
    pub crop_half_y: f64,
}

impl Default for PairingOptions {
    fn default() -> Self {
        PairingOptions {
            max_gap_ns: DEFAULT_MAX_GAP_NS,
            crop_half_x: DEFAULT_CROP_HALF_M,
            crop_half_y: DEFAULT_CROP_HALF_M,
        }
    }
}

/// Renders the ground-truth raster for one pose.
///
/// The crop box is centered on the pose and aligned with the radar frame: the
/// map is first cut with an axis-aligned box large enough to hold the box at
/// any heading, then moved into the radar frame and cut exactly there.
pub fn render_ground_truth(
    map: &PointCloud,
    pose: &Pose,
    extrinsic: &AffineMatrix,
    grid: &BevGridSpec,
    crop_half_x: f64,
    crop_half_y: f64,
) -> Result<BevImage> {
    grid.validate()?;
    let world_to_radar = compose(extrinsic, &inverse(&pose_to_matrix(pose)?));
    let offset = extrinsic.translation();
    let reach = crop_half_x.hypot(crop_half_y)
        + (offset[0] * offset[0] + offset[1] * offset[1] + offset[2] * offset[2]).sqrt()
        + 1.0;
    let coarse = crop_box(map, &CropSpec::new(pose.translation(), reach, reach)?);
    let exact = CropSpec::new([0.0; 3], crop_half_x, crop_half_y)?;
    let radar = to_radar_frame(&coarse, &world_to_radar)
        .filtered(|p| exact.contains(p) && grid.pixel_of(p.x, p.y).is_some());
    project_bev(&radar, grid)
}

/// Reads a radar image and resamples it to the grid when its size differs.
pub fn load_radar_image(path: &Path, grid: &BevGridSpec) -> Result<GrayImage> {
    let img = image::read_image(path)?;
    if img.width() != grid.width_px || img.height() != grid.height_px {
        info!(
            "resampling {} from {}x{} to {}x{}",
            path.display(),
            img.width(),
            img.height(),
            grid.width_px,
            grid.height_px
        );
        return Ok(img.resize_bilinear(grid.width_px, grid.height_px));
    }
    Ok(img)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairOutcome {
    pub manifest: PairManifest,
    /// Radar frames dropped because no pose was close enough in time.
    pub skipped: Vec<(PathBuf, i64)>,
    /// Records whose crop held no map points.
    pub empty_gt: usize,
}

pub const RADAR_SUBDIR: &str = "radar";
pub const GT_SUBDIR: &str = "gt";
pub const MANIFEST_NAME: &str = "manifest.jsonl";

fn frame_stem(path: &Path, ts: i64) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map_or_else(|| ts.to_string(), str::to_string)
}

/// Pairs every radar frame with a ground-truth raster cut from the map.
///
/// Writes `radar/<stem>.pgm` (the input resampled onto the grid) and
/// `gt/<stem>.pgm` under `out_dir`. All records start in the train split; see
/// [`split_manifest`].
pub fn build_pairs(
    radar_frames: &[(PathBuf, i64)],
    track: &PoseTrack,
    map: &PointCloud,
    extrinsic: &AffineMatrix,
    grid: &BevGridSpec,
    out_dir: &Path,
    opts: &PairingOptions,
) -> Result<PairOutcome> {
    grid.validate()?;
    if map.is_empty() {
        return Err(Error::EmptyInput("map has no points".into()));
    }
    let mut frames = radar_frames.to_vec();
    frames.sort_by_key(|f| f.1);

    let radar_dir = out_dir.join(RADAR_SUBDIR);
    let gt_dir = out_dir.join(GT_SUBDIR);
    for d in [&radar_dir, &gt_dir] {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }

    let mut manifest = PairManifest::new(*grid);
    let mut skipped = Vec::new();
    let mut empty_gt = 0;
    for (path, ts) in frames {
        let pose = match nearest_pose(track, ts, opts.max_gap_ns) {
            Ok(p) => p,
            Err(e) => {
                warn!("skipping radar frame {}: {e}", path.display());
                skipped.push((path, ts));
                continue;
            }
        };
        let radar = load_radar_image(&path, grid)?;
        let gt = render_ground_truth(map, &pose, extrinsic, grid, opts.crop_half_x, opts.crop_half_y)?;
        let is_empty = gt.image.count_nonzero() == 0;
        if is_empty {
            warn!("ground truth for {} is empty", path.display());
            empty_gt += 1;
        }
        let name = format!("{}.pgm", frame_stem(&path, ts));
        write_bytes(&radar_dir.join(&name), &pgm::encode(&radar))?;
        write_bytes(&gt_dir.join(&name), &pgm::encode(&gt.image))?;
        manifest.records.push(PairRecord {
            radar_path: format!("{RADAR_SUBDIR}/{name}"),
            gt_path: format!("{GT_SUBDIR}/{name}"),
            timestamp_ns: ts,
            pose,
            split: Split::Train,
            gt_empty: is_empty,
        });
    }
    Ok(PairOutcome { manifest, skipped, empty_gt })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    /// Seeded random assignment.
    #[default]
    Random,
    /// The earliest records train, the rest test.
    Sequential,
}

/// Number of training records: `round(train_fraction * n)`, halves rounded up.
pub fn train_count(n: usize, train_fraction: f64) -> usize {
    ((train_fraction * n as f64 + 0.5).floor() as usize).min(n)
}

/// Assigns `round(train_fraction * N)` records to train and the rest to test.
/// Record order is preserved.
pub fn split_manifest(
    manifest: &PairManifest,
    train_fraction: f64,
    seed: u64,
    mode: SplitMode,
) -> Result<PairManifest> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction {train_fraction} must lie in (0, 1)"
        )));
    }
    let n = manifest.records.len();
    let k = train_count(n, train_fraction);
    let mut order: Vec<usize> = (0..n).collect();
    if mode == SplitMode::Random {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut is_train = vec![false; n];
    for &i in &order[..k] {
        is_train[i] = true;
    }
    let mut out = manifest.clone();
    for (r, train) in out.records.iter_mut().zip(is_train) {
        r.split = if train { Split::Train } else { Split::Test };
    }
    Ok(out)
}
