use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{psnr, rmi_default, ssim, RMI_EPSILON, RMI_RADIUS, RMI_VARIANT};
use crate::error::{Error, Result};
use crate::image::read_image;
use crate::pairing::{PairManifest, Split};

/// Averages over a set of image pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Mean over finite-PSNR pairs; infinite when every pair matched exactly.
    #[serde(serialize_with = "ser_db", deserialize_with = "de_db")]
    pub psnr_db: f64,
    pub ssim: f64,
    pub rmi: f64,
    pub n_images: usize,
    /// Pairs with zero error, left out of the PSNR mean.
    pub psnr_infinite: usize,
    pub rmi_variant: String,
    pub rmi_radius: usize,
    pub rmi_epsilon: f64,
}

fn ser_db<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn de_db<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Db {
        Num(f64),
        Text(String),
    }
    match Db::deserialize(d)? {
        Db::Num(v) => Ok(v),
        Db::Text(t) if t == "inf" => Ok(f64::INFINITY),
        Db::Text(t) => Err(serde::de::Error::custom(format!("bad PSNR value `{t}`"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMetrics {
    pub timestamp_ns: i64,
    pub candidate: PathBuf,
    #[serde(serialize_with = "ser_db", deserialize_with = "de_db")]
    pub psnr_db: f64,
    pub ssim: f64,
    pub rmi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: MetricReport,
    pub pairs: Vec<PairMetrics>,
}

impl MetricReport {
    /// Arithmetic means over `pairs`, summed in index order.
    pub fn from_pairs(pairs: &[PairMetrics]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyInput("no pairs to evaluate".into()));
        }
        let n = pairs.len() as f64;
        let finite: Vec<f64> = pairs.iter().map(|p| p.psnr_db).filter(|v| v.is_finite()).collect();
        let psnr_db = if finite.is_empty() {
            f64::INFINITY
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        };
        Ok(MetricReport {
            psnr_db,
            ssim: pairs.iter().map(|p| p.ssim).sum::<f64>() / n,
            rmi: pairs.iter().map(|p| p.rmi).sum::<f64>() / n,
            n_images: pairs.len(),
            psnr_infinite: pairs.len() - finite.len(),
            rmi_variant: RMI_VARIANT.to_string(),
            rmi_radius: RMI_RADIUS,
            rmi_epsilon: RMI_EPSILON,
        })
    }
}

fn find_candidate(candidate_dir: &Path, gt_path: &str) -> Option<PathBuf> {
    let name = Path::new(gt_path).file_name()?;
    let direct = candidate_dir.join(name);
    if direct.is_file() {
        return Some(direct);
    }
    let stem = Path::new(name).file_stem()?;
    ["png", "pgm"]
        .iter()
        .map(|ext| candidate_dir.join(stem).with_extension(ext))
        .find(|p| p.is_file())
}

/// Scores candidate images against the manifest's ground truth.
///
/// Candidates are matched to records by ground-truth file name (a `.png` or
/// `.pgm` with the same stem is also accepted). `manifest_dir` anchors the
/// manifest's relative paths. When `split` is given only those records count.
pub fn evaluate_pairs(
    manifest: &PairManifest,
    manifest_dir: &Path,
    candidate_dir: &Path,
    split: Option<Split>,
) -> Result<Evaluation> {
    let records: Vec<_> = manifest
        .records
        .iter()
        .filter(|r| split.is_none_or(|s| r.split == s))
        .collect();
    let mut missing = Vec::new();
    let mut found = Vec::with_capacity(records.len());
    for r in &records {
        match find_candidate(candidate_dir, &r.gt_path) {
            Some(p) => found.push(p),
            None => missing.push(candidate_dir.join(Path::new(&r.gt_path).file_name().unwrap_or_default())),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingCandidates(missing));
    }
    let mut pairs = Vec::with_capacity(records.len());
    for (r, cand_path) in records.iter().zip(found) {
        let gt = read_image(&manifest_dir.join(&r.gt_path))?;
        let cand = read_image(&cand_path)?;
        pairs.push(PairMetrics {
            timestamp_ns: r.timestamp_ns,
            psnr_db: psnr(&cand, &gt)?,
            ssim: ssim(&cand, &gt)?,
            rmi: rmi_default(&cand, &gt)?,
            candidate: cand_path,
        });
    }
    let report = MetricReport::from_pairs(&pairs)?;
    Ok(Evaluation { report, pairs })
}

/// Renders reports as an aligned table, one row per labeled report.
pub fn format_table(rows: &[(&str, &MetricReport)]) -> String {
    let label_w = rows.iter().map(|(l, _)| l.len()).chain([9]).max().unwrap_or(9);
    let mut out = format!("{:<label_w$} | {:>10} | {:>8} | {:>8} | {:>6}\n", "Data Type", "PSNR", "SSIM", "RMI", "N");
    out.push_str(&format!("{}\n", "-".repeat(label_w + 45)));
    for (label, r) in rows {
        let psnr = if r.psnr_db.is_finite() { format!("{:.4}", r.psnr_db) } else { "inf".into() };
        out.push_str(&format!(
            "{:<label_w$} | {:>10} | {:>8.4} | {:>8.4} | {:>6}\n",
            label, psnr, r.ssim, r.rmi, r.n_images
        ));
    }
    out
}
