//! Line-delimited JSON pair manifests.
//!
//! The first line is a header object carrying the grid; every following
//! non-blank line is one [`PairRecord`]. Paths are relative to the directory
//! holding the manifest.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::projection::BevGridSpec;

pub const FORMAT: &str = "radar-gt-manifest";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(Error::InvalidParameter(format!("unknown split `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairRecord {
    pub radar_path: String,
    pub gt_path: String,
    pub timestamp_ns: i64,
    pub pose: Pose,
    pub split: Split,
    /// Set when the crop around the pose held no map points.
    #[serde(default)]
    pub gt_empty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
    grid: BevGridSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairManifest {
    pub grid: BevGridSpec,
    pub records: Vec<PairRecord>,
}

impl PairManifest {
    pub fn new(grid: BevGridSpec) -> Self {
        PairManifest { grid, records: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        for (i, pair) in self.records.windows(2).enumerate() {
            if pair[1].timestamp_ns < pair[0].timestamp_ns {
                return Err(Error::InvalidParameter(format!(
                    "record {} has timestamp {} before {}",
                    i + 1,
                    pair[1].timestamp_ns,
                    pair[0].timestamp_ns
                )));
            }
        }
        for r in &self.records {
            if r.radar_path.is_empty() || r.gt_path.is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "record at {} has an empty path",
                    r.timestamp_ns
                )));
            }
        }
        Ok(())
    }

    pub fn count(&self, split: Split) -> usize {
        self.records.iter().filter(|r| r.split == split).count()
    }

    pub fn to_jsonl(&self) -> String {
        let header = Header {
            format: FORMAT.to_string(),
            version: FORMAT_VERSION,
            grid: self.grid,
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(out, "{}", serde_json::to_string(r).expect("record serializes"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());
        let (line, first) = lines
            .next()
            .ok_or(Error::ManifestLine { line: 1, msg: "missing header".into() })?;
        let header: Header = serde_json::from_str(first)
            .map_err(|e| Error::ManifestLine { line, msg: format!("bad header: {e}") })?;
        if header.format != FORMAT || header.version != FORMAT_VERSION {
            return Err(Error::ManifestLine {
                line,
                msg: format!("unsupported format {} v{}", header.format, header.version),
            });
        }
        header
            .grid
            .validate()
            .map_err(|e| Error::ManifestLine { line, msg: e.to_string() })?;
        let mut records: Vec<PairRecord> = Vec::new();
        for (line, text) in lines {
            let r: PairRecord = serde_json::from_str(text)
                .map_err(|e| Error::ManifestLine { line, msg: e.to_string() })?;
            if r.radar_path.is_empty() || r.gt_path.is_empty() {
                return Err(Error::ManifestLine { line, msg: "empty path".into() });
            }
            if let Some(prev) = records.last() {
                if r.timestamp_ns < prev.timestamp_ns {
                    return Err(Error::ManifestLine {
                        line,
                        msg: format!("timestamp {} precedes {}", r.timestamp_ns, prev.timestamp_ns),
                    });
                }
            }
            records.push(r);
        }
        Ok(PairManifest { grid: header.grid, records })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PairManifest::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_jsonl()).map_err(|e| Error::io(path, e))
    }
}
