//! Byte accounting between a baseline corpus and a transformed variant.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// One baseline/variant file pair, matched by stem.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SizeEntry {
    pub stem: String,
    pub baseline_bytes: u64,
    pub variant_bytes: u64,
}

/// Aggregate storage comparison; entries are ordered by stem so the stats
/// are deterministic.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SizeStats {
    pub entries: Vec<SizeEntry>,
    pub baseline_total: u64,
    pub variant_total: u64,
    pub baseline_mean: f64,
    pub variant_mean: f64,
    pub baseline_median: f64,
    pub variant_median: f64,
    /// 1 − variant_total/baseline_total; negative when the variant grew.
    pub reduction: f64,
}

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "qraw"];

/// Maps image-file stems to byte sizes for one directory.
pub fn image_sizes(dir: &Path) -> Result<BTreeMap<String, u64>> {
    let mut sizes = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(Error::io_at(dir))? {
        let entry = entry.map_err(Error::io_at(dir))?;
        let path = entry.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if !is_image {
            continue;
        }
        let stem = match path.file_stem().and_then(|s| s.to_str()) {
            Some(s) => s.to_owned(),
            None => continue,
        };
        let len = entry.metadata().map_err(Error::io_at(&path))?.len();
        sizes.insert(stem, len);
    }
    Ok(sizes)
}

/// Image files in a directory as (stem, path) pairs, sorted by stem. Only
/// regular files with a recognized image extension are listed; the directory
/// is never recursed into.
pub fn list_images(dir: &Path) -> Result<Vec<(String, std::path::PathBuf)>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(Error::io_at(dir))? {
        let entry = entry.map_err(Error::io_at(dir))?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if !is_image {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            files.push((stem.to_owned(), path));
        }
    }
    files.sort();
    Ok(files)
}

/// Pairs every baseline image with its variant counterpart (same stem, any
/// image extension) and aggregates byte totals.
pub fn compute_size_stats(baseline_dir: &Path, variant_dir: &Path) -> Result<SizeStats> {
    let baseline = image_sizes(baseline_dir)?;
    let variant = image_sizes(variant_dir)?;
    let mut entries = Vec::with_capacity(baseline.len());
    for (stem, &baseline_bytes) in &baseline {
        let variant_bytes = *variant.get(stem).ok_or_else(|| Error::MissingCounterpart {
            stem: stem.clone(),
            dir: variant_dir.to_owned(),
        })?;
        entries.push(SizeEntry { stem: stem.clone(), baseline_bytes, variant_bytes });
    }
    SizeStats::from_entries(entries)
}

impl SizeStats {
    pub fn from_entries(entries: Vec<SizeEntry>) -> Result<SizeStats> {
        if entries.is_empty() {
            return Err(Error::Schema("no image files to compare".into()));
        }
        let baseline_total: u64 = entries.iter().map(|e| e.baseline_bytes).sum();
        let variant_total: u64 = entries.iter().map(|e| e.variant_bytes).sum();
        let n = entries.len() as f64;
        Ok(SizeStats {
            baseline_mean: baseline_total as f64 / n,
            variant_mean: variant_total as f64 / n,
            baseline_median: median(entries.iter().map(|e| e.baseline_bytes)),
            variant_median: median(entries.iter().map(|e| e.variant_bytes)),
            reduction: 1.0 - variant_total as f64 / baseline_total as f64,
            baseline_total,
            variant_total,
            entries,
        })
    }
}

fn median(values: impl Iterator<Item = u64>) -> f64 {
    let mut v: Vec<u64> = values.collect();
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}
