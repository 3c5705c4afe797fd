//! `radar-gt`: builds LiDAR maps, pairs radar frames with map-derived ground
//! truth, scores enhanced images and generates synthetic datasets.
//!
//! Machine-readable results go to stdout as JSON; tables, warnings and errors
//! go to stderr. Exit status: 0 success, 1 usage error, 2 data error.

mod config;
mod grid;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use log::warn;
use serde_json::json;

use radar_gt::augment::{augment_pair, AugmentLog};
use radar_gt::image::{pgm, read_image, write_image};
use radar_gt::metrics::{evaluate_pairs, format_table};
use radar_gt::pairing::{
    self, build_map_from_files, build_pairs, list_timestamped_files, pcbf, split_manifest, PairManifest,
    PairingOptions, PoseTrack, Split, SplitMode, GT_SUBDIR, MANIFEST_NAME, RADAR_SUBDIR,
};
use radar_gt::pointcloud::MAP_FRAME;
use radar_gt::synth::{generate_dataset, random_corridor_world, straight_trajectory, SynthOptions, World};

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "radar-gt", version, about = "LiDAR-assisted ground truth for radar image enhancement")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Base directory for relative input and output paths.
    #[arg(long, global = true)]
    dataset_root: Option<PathBuf>,
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random stream (split, speckle, augmentation, worlds).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Raster side length in pixels.
    #[arg(long, global = true)]
    grid_size: Option<usize>,
    /// Raster side length in meters.
    #[arg(long, global = true)]
    grid_span: Option<f64>,
    /// Voxel leaf size in meters [default: 0.8].
    #[arg(long, global = true)]
    voxel_leaf: Option<f64>,
    /// Crop half extent in meters [default: 100].
    #[arg(long, global = true)]
    crop_half: Option<f64>,
    /// Largest radar-to-pose time gap in milliseconds [default: 500].
    #[arg(long, global = true)]
    max_gap_ms: Option<f64>,
    /// Fraction of pairs assigned to the train split [default: 2032/2539].
    #[arg(long, global = true)]
    train_fraction: Option<f64>,
    #[arg(long, global = true, value_enum)]
    split_mode: Option<SplitModeArg>,
    /// LiDAR-to-radar extrinsic as JSON: a 4x4 matrix or {"xyz":[..],"rpy":[..]}.
    #[arg(long, global = true)]
    extrinsic: Option<PathBuf>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum SplitModeArg {
    Random,
    Sequential,
}

impl From<SplitModeArg> for SplitMode {
    fn from(m: SplitModeArg) -> Self {
        match m {
            SplitModeArg::Random => SplitMode::Random,
            SplitModeArg::Sequential => SplitMode::Sequential,
        }
    }
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum SplitArg {
    Train,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Accumulate posed LiDAR scans into a voxel-filtered map.
    BuildMap {
        /// Directory of `<timestamp_ns>.pcbf` scans.
        #[arg(long)]
        scans: PathBuf,
        #[arg(long)]
        poses: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pair radar frames with ground-truth rasters cut from the map.
    MakePairs {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        poses: PathBuf,
        /// Directory of `<timestamp_ns>.png|pgm` radar images.
        #[arg(long)]
        radar_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score candidate images against the manifest's ground truth.
    Metrics {
        #[arg(long)]
        manifest: PathBuf,
        /// Candidate images named like the ground truth; defaults to the
        /// manifest's radar inputs.
        #[arg(long)]
        candidates: Option<PathBuf>,
        #[arg(long)]
        label: Option<String>,
        #[arg(long, value_enum)]
        split: Option<SplitArg>,
    },
    /// Generate a synthetic dataset from a box world and a trajectory.
    Synth {
        #[arg(long)]
        world: PathBuf,
        /// Pose CSV with the sensor trajectory.
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a random corridor world and a straight trajectory through it.
    World {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 40)]
        boxes: usize,
        #[arg(long, default_value_t = 20)]
        poses: usize,
        /// Distance between consecutive poses in meters.
        #[arg(long, default_value_t = 4.0)]
        step: f64,
    },
    /// Tile input / enhanced / ground-truth images of the first pairs into a PNG.
    Grid {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        enhanced: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        count: usize,
    },
    /// Write a seeded, augmented copy of the pairs with an audit log.
    Augment {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        split: Option<SplitArg>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let cfg = match RunConfig::resolve(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command, &cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn emit(value: serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &value)?;
    writeln!(out)?;
    Ok(())
}

fn create_dir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).with_context(|| format!("creating {}", p.display()))
}

fn run(command: Command, cfg: &RunConfig) -> Result<()> {
    match command {
        Command::BuildMap { scans, poses, out } => build_map(cfg, &scans, &poses, &out),
        Command::MakePairs { map, poses, radar_dir, out } => make_pairs(cfg, &map, &poses, &radar_dir, &out),
        Command::Metrics { manifest, candidates, label, split } => {
            metrics(cfg, &manifest, candidates.as_deref(), label, split.map(Into::into))
        }
        Command::Synth { world, trajectory, out } => synth(cfg, &world, &trajectory, &out),
        Command::World { out, boxes, poses, step } => world(cfg, &out, boxes, poses, step),
        Command::Grid { manifest, out, enhanced, count } => grid_sheet(cfg, &manifest, &out, enhanced.as_deref(), count),
        Command::Augment { manifest, out, split } => augment(cfg, &manifest, &out, split.map(Into::into)),
    }
}

fn build_map(cfg: &RunConfig, scans: &Path, poses: &Path, out: &Path) -> Result<()> {
    let scans = cfg.existing(scans)?;
    let track = PoseTrack::read_csv(&cfg.existing(poses)?)?;
    let files = list_timestamped_files(&scans, &["pcbf"])?;
    let (map, stats) = build_map_from_files(&files, &track, &cfg.voxel, cfg.max_gap_ns)?;
    let out = cfg.path(out);
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    pcbf::write(&out, &map)?;
    emit(json!({ "map": out, "stats": stats }))
}

fn make_pairs(cfg: &RunConfig, map: &Path, poses: &Path, radar_dir: &Path, out: &Path) -> Result<()> {
    let map = pcbf::read(&cfg.existing(map)?, MAP_FRAME)?;
    let track = PoseTrack::read_csv(&cfg.existing(poses)?)?;
    let radar_dir = cfg.existing(radar_dir)?;
    let frames = list_timestamped_files(&radar_dir, &["png", "pgm"])?;
    let out = cfg.path(out);
    create_dir(&out)?;
    let opts = PairingOptions { max_gap_ns: cfg.max_gap_ns, crop_half_x: cfg.crop_half, crop_half_y: cfg.crop_half };
    let (manifest, skipped, empty_gt) = if frames.is_empty() {
        warn!("no radar frames in {}; writing an empty manifest", radar_dir.display());
        (PairManifest::new(cfg.grid), Vec::new(), 0)
    } else {
        let o = build_pairs(&frames, &track, &map, &cfg.extrinsic, &cfg.grid, &out, &opts)?;
        (o.manifest, o.skipped, o.empty_gt)
    };
    let manifest = split_manifest(&manifest, cfg.train_fraction, cfg.seed, cfg.split_mode)?;
    let manifest_path = out.join(MANIFEST_NAME);
    manifest.write(&manifest_path)?;
    emit(json!({
        "manifest": manifest_path,
        "records": manifest.records.len(),
        "train": manifest.count(Split::Train),
        "test": manifest.count(Split::Test),
        "empty_gt": empty_gt,
        "skipped": skipped.iter().map(|(p, _)| p).collect::<Vec<_>>(),
    }))
}

fn manifest_dir(path: &Path) -> PathBuf {
    path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}

fn metrics(
    cfg: &RunConfig,
    manifest: &Path,
    candidates: Option<&Path>,
    label: Option<String>,
    split: Option<Split>,
) -> Result<()> {
    let path = cfg.existing(manifest)?;
    let m = PairManifest::read(&path)?;
    let base = manifest_dir(&path);
    let (dir, default_label) = match candidates {
        Some(c) => (cfg.existing(c)?, "Enhanced Image"),
        None => (base.join(RADAR_SUBDIR), "Input Radar Image"),
    };
    let label = label.unwrap_or_else(|| default_label.to_string());
    let ev = evaluate_pairs(&m, &base, &dir, split)?;
    eprint!("{}", format_table(&[(label.as_str(), &ev.report)]));
    emit(json!({ "label": label, "report": ev.report, "pairs": ev.pairs }))
}

fn synth(cfg: &RunConfig, world: &Path, trajectory: &Path, out: &Path) -> Result<()> {
    let world = World::read(&cfg.existing(world)?)?;
    let track = PoseTrack::read_csv(&cfg.existing(trajectory)?)?;
    let out = cfg.path(out);
    let opts = SynthOptions {
        lidar: cfg.lidar.clone(),
        radar: cfg.radar.clone(),
        extrinsic: cfg.extrinsic,
        grid: cfg.grid,
        voxel: cfg.voxel,
        crop_half: cfg.crop_half,
    };
    let outcome = generate_dataset(&world, &track, &opts, &out)?;
    let manifest = split_manifest(&outcome.manifest, cfg.train_fraction, cfg.seed, cfg.split_mode)?;
    let manifest_path = out.join(MANIFEST_NAME);
    manifest.write(&manifest_path)?;
    let within: Vec<f64> = outcome.agreement.iter().map(|a| a.within_one).collect();
    emit(json!({
        "manifest": manifest_path,
        "records": manifest.records.len(),
        "map_points": outcome.map_points,
        "agreement_within_one_min": within.iter().copied().fold(1.0, f64::min),
        "agreement_within_one_mean": within.iter().sum::<f64>() / within.len().max(1) as f64,
    }))
}

fn world(cfg: &RunConfig, out: &Path, boxes: usize, poses: usize, step: f64) -> Result<()> {
    let out = cfg.path(out);
    create_dir(&out)?;
    let w = random_corridor_world(cfg.seed, boxes, 4.0, 2.0);
    let track = straight_trajectory(poses, [-step * poses as f64 / 2.0, 0.0, 1.8], step, 0.0, 100_000_000);
    let world_path = out.join("world.json");
    std::fs::write(&world_path, w.to_json() + "\n").with_context(|| format!("writing {}", world_path.display()))?;
    let traj_path = out.join("trajectory.csv");
    pairing::poses::write_file(&traj_path, &track)?;
    emit(json!({ "world": world_path, "trajectory": traj_path, "boxes": w.boxes.len(), "poses": track.len() }))
}

fn grid_sheet(cfg: &RunConfig, manifest: &Path, out: &Path, enhanced: Option<&Path>, count: usize) -> Result<()> {
    let path = cfg.existing(manifest)?;
    let m = PairManifest::read(&path)?;
    let base = manifest_dir(&path);
    let load = |p: PathBuf| match read_image(&p) {
        Ok(img) => Some(img),
        Err(e) => {
            warn!("tile left blank: {e}");
            None
        }
    };
    let records = &m.records[..count.min(m.records.len())];
    let mut rows = vec![records.iter().map(|r| load(base.join(&r.radar_path))).collect::<Vec<_>>()];
    match enhanced.map(|e| cfg.path(e)) {
        Some(dir) if dir.is_dir() => rows.push(
            records
                .iter()
                .map(|r| load(dir.join(Path::new(&r.gt_path).file_name().unwrap_or_default())))
                .collect(),
        ),
        Some(dir) => warn!("enhanced directory {} not found; omitting that row", dir.display()),
        None => {}
    }
    rows.push(records.iter().map(|r| load(base.join(&r.gt_path))).collect());
    let sheet = grid::tile(&rows);
    let out = cfg.path(out);
    write_image(&out, &sheet)?;
    emit(json!({
        "grid": out,
        "rows": rows.len(),
        "columns": records.len(),
        "width": sheet.width(),
        "height": sheet.height(),
    }))
}

fn augment(cfg: &RunConfig, manifest: &Path, out: &Path, split: Option<Split>) -> Result<()> {
    let path = cfg.existing(manifest)?;
    let m = PairManifest::read(&path)?;
    let base = manifest_dir(&path);
    let out = cfg.path(out);
    for d in [RADAR_SUBDIR, GT_SUBDIR] {
        create_dir(&out.join(d))?;
    }
    let mut augmented = PairManifest::new(m.grid);
    let mut log_lines = String::new();
    for (index, rec) in m.records.iter().enumerate() {
        if split.is_some_and(|s| rec.split != s) {
            continue;
        }
        let input = read_image(&base.join(&rec.radar_path))?;
        let target = read_image(&base.join(&rec.gt_path))?;
        let pair = augment_pair(&input, &target, &cfg.augment, index as u64)?;
        let name = Path::new(&rec.gt_path).file_name().unwrap_or_default().to_string_lossy().into_owned();
        let name = Path::new(&name).with_extension("pgm").display().to_string();
        for (sub, img) in [(RADAR_SUBDIR, &pair.input), (GT_SUBDIR, &pair.target)] {
            let p = out.join(sub).join(&name);
            std::fs::write(&p, pgm::encode(img)).with_context(|| format!("writing {}", p.display()))?;
        }
        let log = AugmentLog { pair_index: index as u64, ops: pair.applied_ops };
        log_lines.push_str(&serde_json::to_string(&log)?);
        log_lines.push('\n');
        augmented.records.push(pairing::PairRecord {
            radar_path: format!("{RADAR_SUBDIR}/{name}"),
            gt_path: format!("{GT_SUBDIR}/{name}"),
            gt_empty: pair.target.count_nonzero() == 0,
            ..rec.clone()
        });
    }
    let manifest_path = out.join(MANIFEST_NAME);
    augmented.write(&manifest_path)?;
    let log_path = out.join("augment_log.jsonl");
    std::fs::write(&log_path, log_lines).with_context(|| format!("writing {}", log_path.display()))?;
    emit(json!({ "manifest": manifest_path, "log": log_path, "records": augmented.records.len() }))
}
