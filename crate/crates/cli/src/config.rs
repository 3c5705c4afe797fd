//! Run configuration: built-in defaults, then the JSON config file, then flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use radar_gt::augment::AugmentConfig;
use radar_gt::geometry::{pose_to_matrix, AffineMatrix, Pose};
use radar_gt::pairing::{SplitMode, DEFAULT_MAX_GAP_NS};
use radar_gt::pointcloud::{VoxelSpec, DEFAULT_CROP_HALF_M, DEFAULT_LEAF_M};
use radar_gt::projection::{BevGridSpec, DEFAULT_SIZE_PX, DEFAULT_SPAN_M};
use radar_gt::synth::{LidarModel, RadarModel};

use crate::GlobalArgs;

/// Reproduces the published 2032 / 507 train-test split of 2539 frames.
pub const DEFAULT_TRAIN_FRACTION: f64 = 2032.0 / 2539.0;

/// LiDAR-to-radar extrinsic, as a 4x4 row-major matrix or as a pose.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ExtrinsicSpec {
    Matrix(AffineMatrix),
    Pose { xyz: [f64; 3], rpy: [f64; 3] },
}

impl ExtrinsicSpec {
    pub fn matrix(&self) -> Result<AffineMatrix> {
        match self {
            ExtrinsicSpec::Matrix(m) => Ok(*m),
            ExtrinsicSpec::Pose { xyz, rpy } => Ok(pose_to_matrix(&Pose::new(0, *xyz, *rpy))?),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub dataset_root: Option<PathBuf>,
    pub seed: Option<u64>,
    pub grid_size: Option<usize>,
    pub grid_span: Option<f64>,
    pub voxel_leaf: Option<f64>,
    pub crop_half: Option<f64>,
    pub max_gap_ms: Option<f64>,
    pub train_fraction: Option<f64>,
    pub split_mode: Option<SplitMode>,
    pub extrinsic: Option<ExtrinsicSpec>,
    pub augment: Option<AugmentConfig>,
    pub lidar: Option<LidarModel>,
    pub radar: Option<RadarModel>,
}

impl FileConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dataset_root: Option<PathBuf>,
    pub seed: u64,
    pub grid: BevGridSpec,
    pub voxel: VoxelSpec,
    pub crop_half: f64,
    pub max_gap_ns: i64,
    pub train_fraction: f64,
    pub split_mode: SplitMode,
    pub extrinsic: AffineMatrix,
    pub augment: AugmentConfig,
    pub lidar: LidarModel,
    pub radar: RadarModel,
}

impl RunConfig {
    pub fn resolve(args: &GlobalArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => FileConfig::read(p)?,
            None => FileConfig::default(),
        };
        let seed = args.seed.or(file.seed).unwrap_or(0);
        let grid = BevGridSpec::new(
            args.grid_size.or(file.grid_size).unwrap_or(DEFAULT_SIZE_PX),
            args.grid_span.or(file.grid_span).unwrap_or(DEFAULT_SPAN_M),
        )?;
        let voxel = VoxelSpec::cube(args.voxel_leaf.or(file.voxel_leaf).unwrap_or(DEFAULT_LEAF_M))?;
        let crop_half = args.crop_half.or(file.crop_half).unwrap_or(DEFAULT_CROP_HALF_M);
        if !(crop_half.is_finite() && crop_half > 0.0) {
            bail!("crop half extent {crop_half} must be > 0");
        }
        let max_gap_ns = match args.max_gap_ms.or(file.max_gap_ms) {
            Some(ms) if ms.is_finite() && ms > 0.0 => (ms * 1e6).round() as i64,
            Some(ms) => bail!("max gap {ms} ms must be > 0"),
            None => DEFAULT_MAX_GAP_NS,
        };
        let train_fraction = args.train_fraction.or(file.train_fraction).unwrap_or(DEFAULT_TRAIN_FRACTION);
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            bail!("train fraction {train_fraction} must lie in (0, 1)");
        }
        let extrinsic = match &args.extrinsic {
            Some(p) => {
                let text =
                    std::fs::read_to_string(p).with_context(|| format!("reading extrinsic {}", p.display()))?;
                serde_json::from_str::<ExtrinsicSpec>(&text)
                    .with_context(|| format!("parsing extrinsic {}", p.display()))?
                    .matrix()?
            }
            None => match &file.extrinsic {
                Some(e) => e.matrix()?,
                None => AffineMatrix::IDENTITY,
            },
        };
        // One seed drives every random stream.
        let augment = AugmentConfig { seed, ..file.augment.unwrap_or_default() };
        augment.validate()?;
        let radar = RadarModel { seed, ..file.radar.unwrap_or_default() };
        radar.validate()?;
        let lidar = file.lidar.unwrap_or_default();
        lidar.validate()?;
        Ok(RunConfig {
            dataset_root: args.dataset_root.clone().or(file.dataset_root),
            seed,
            grid,
            voxel,
            crop_half,
            max_gap_ns,
            train_fraction,
            split_mode: args.split_mode.map(SplitMode::from).or(file.split_mode).unwrap_or_default(),
            extrinsic,
            augment,
            lidar,
            radar,
        })
    }

    /// Resolves relative paths against the dataset root, when one is set.
    pub fn path(&self, p: &Path) -> PathBuf {
        match &self.dataset_root {
            Some(root) if p.is_relative() => root.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// Like [`RunConfig::path`], for inputs that must already exist.
    pub fn existing(&self, p: &Path) -> Result<PathBuf> {
        let full = self.path(p);
        if !full.exists() {
            bail!("{} not found", full.display());
        }
        Ok(full)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrinsic_forms() {
        let m: ExtrinsicSpec = serde_json::from_str(r#"{"xyz":[0.5,0,1],"rpy":[0,0,0]}"#).unwrap();
        assert_eq!(m.matrix().unwrap().translation(), [0.5, 0.0, 1.0]);
        let rows: ExtrinsicSpec =
            serde_json::from_str("[[1,0,0,2],[0,1,0,0],[0,0,1,0],[0,0,0,1]]").unwrap();
        assert_eq!(rows.matrix().unwrap().translation(), [2.0, 0.0, 0.0]);
        assert!(serde_json::from_str::<ExtrinsicSpec>("[[2,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]").is_err());
    }

    #[test]
    fn unknown_config_keys_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"voxel_leef":0.5}"#).is_err());
        let c: FileConfig = serde_json::from_str(r#"{"voxel_leaf":0.5,"split_mode":"sequential"}"#).unwrap();
        assert_eq!(c.split_mode, Some(SplitMode::Sequential));
    }
}
