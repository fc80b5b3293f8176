//! Parameter-grid sweeps: expand value lists into a config grid, transform
//! and re-encode the corpus per config, account for storage, optionally
//! score an external detector, and emit trade-off reports.

pub mod report;

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::annotations::{AnnotationSet, Detection, DetectionSet};
use crate::bench::DetectorContract;
use crate::codec::{self, stats::list_images, StorageFormat};
use crate::config::{parse_kv_lines, PipelineConfig};
use crate::error::{Error, Result};
use crate::transforms::apply_config;
pub use report::{emit_report, ReportKind, ReportRow, ScatterX};

pub const DEFAULT_CAP: usize = 512;

/// Grid parameter keys, in nesting order (first varies slowest).
pub const PARAM_KEYS: [&str; 7] = [
    "quant_bits",
    "jpeg_quality",
    "max_side",
    "scale_factor",
    "color_model",
    "gamma",
    "distortion_k1",
];

fn default_value(key: &str) -> &'static str {
    match key {
        "quant_bits" => "8",
        "jpeg_quality" => "lossless",
        "max_side" => "full",
        "scale_factor" => "1",
        "color_model" => "rgb",
        "gamma" => "none",
        "distortion_k1" => "0",
        _ => unreachable!("key list is fixed"),
    }
}

/// A parameter grid plus the run context a spec file may pin down: one value
/// list per pipeline parameter, the cross-product cap, and optional corpus /
/// annotations / detector / output entries (command-line flags take
/// precedence over these).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    lists: [Vec<String>; 7],
    pub cap: usize,
    pub corpus: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub detector: Option<String>,
    pub out_dir: Option<PathBuf>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            lists: PARAM_KEYS.map(|k| vec![default_value(k).to_string()]),
            cap: DEFAULT_CAP,
            corpus: None,
            annotations: None,
            detector: None,
            out_dir: None,
        }
    }
}

impl SweepSpec {
    /// Parses the sweep grammar: `key = value` lines, `#` comments, repeated
    /// parameter keys building lists. Unlisted parameters keep their single
    /// default. `corpus`, `annotations`, `detector`, `out`, and `cap` set the
    /// run context (last occurrence wins).
    pub fn from_kv_text(text: &str) -> Result<SweepSpec> {
        let mut spec = SweepSpec::default();
        let mut lists: [Vec<String>; 7] = Default::default();
        for (line, key, value) in parse_kv_lines(text)? {
            match key.as_str() {
                "corpus" => spec.corpus = Some(PathBuf::from(value)),
                "annotations" => spec.annotations = Some(PathBuf::from(value)),
                "detector" => {
                    DetectorContract::parse(&value)
                        .map_err(|e| Error::ConfigParse { line, reason: e.to_string() })?;
                    spec.detector = Some(value);
                }
                "out" => spec.out_dir = Some(PathBuf::from(value)),
                "cap" => {
                    spec.cap = value.parse().map_err(|_| Error::ConfigParse {
                        line,
                        reason: format!("cap must be a positive integer, got '{value}'"),
                    })?;
                }
                _ => {
                    let slot = PARAM_KEYS.iter().position(|&k| k == key).ok_or_else(|| {
                        Error::ConfigParse {
                            line,
                            reason: format!(
                                "unknown sweep key '{key}' (known: {}, corpus, annotations, detector, out, cap)",
                                PARAM_KEYS.join(", ")
                            ),
                        }
                    })?;
                    // Each value must be individually valid; probe it through
                    // the single-config parser.
                    let mut probe = PipelineConfig::default();
                    probe
                        .set_field(&key, &value)
                        .map_err(|reason| Error::ConfigParse { line, reason })?;
                    probe
                        .validate()
                        .map_err(|e| Error::ConfigParse { line, reason: e.to_string() })?;
                    lists[slot].push(value);
                }
            }
        }
        for (slot, key) in PARAM_KEYS.iter().enumerate() {
            if lists[slot].is_empty() {
                lists[slot].push(default_value(key).to_string());
            }
        }
        spec.lists = lists;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<SweepSpec> {
        let text = std::fs::read_to_string(path).map_err(Error::io_at(path))?;
        SweepSpec::from_kv_text(&text)
    }

    /// Replaces one parameter's value list.
    pub fn set_list(&mut self, key: &str, values: &[&str]) -> Result<()> {
        let slot = PARAM_KEYS
            .iter()
            .position(|&k| k == key)
            .ok_or_else(|| Error::Schema(format!("unknown sweep key '{key}'")))?;
        self.lists[slot] = values.iter().map(|v| v.to_string()).collect();
        Ok(())
    }

    /// Cross-product size before dedup.
    pub fn grid_size(&self) -> usize {
        self.lists.iter().map(Vec::len).product()
    }

    /// Expands the grid in fixed nesting order (`PARAM_KEYS`, first key
    /// slowest) into validated canonical configs, deduplicated by config id.
    pub fn configs(&self) -> Result<Vec<PipelineConfig>> {
        let n = self.grid_size();
        if n > self.cap {
            return Err(Error::SweepCapExceeded { n, cap: self.cap });
        }
        let mut out = Vec::with_capacity(n);
        let mut seen = BTreeSet::new();
        let mut indices = [0usize; 7];
        'grid: loop {
            let mut cfg = PipelineConfig::default();
            for (slot, key) in PARAM_KEYS.iter().enumerate() {
                cfg.set_field(key, &self.lists[slot][indices[slot]])
                    .map_err(|reason| Error::ConfigParse { line: 0, reason })?;
            }
            cfg.normalize();
            cfg.validate()?;
            if seen.insert(cfg.config_id()) {
                out.push(cfg);
            }
            // Odometer increment, last key fastest.
            for slot in (0..7).rev() {
                indices[slot] += 1;
                if indices[slot] < self.lists[slot].len() {
                    continue 'grid;
                }
                indices[slot] = 0;
            }
            break;
        }
        Ok(out)
    }
}

/// Named grids: `baseline` (identity), `optimized` (the reduced-data
/// configuration, with gray optional), `paper-grid` (the full studied value
/// lists; exceeds the default cap by design).
pub fn preset(name: &str) -> Result<SweepSpec> {
    let mut spec = SweepSpec::default();
    match name {
        "baseline" => {}
        "optimized" => {
            spec.set_list("quant_bits", &["4"])?;
            spec.set_list("jpeg_quality", &["90"])?;
            spec.set_list("color_model", &["rgb", "gray"])?;
        }
        "paper-grid" => {
            spec.set_list("quant_bits", &["8", "4", "2"])?;
            spec.set_list("jpeg_quality", &["lossless", "90", "70"])?;
            spec.set_list("max_side", &["256", "512", "768", "1024"])?;
            spec.set_list("scale_factor", &["0.5", "1", "2"])?;
            spec.set_list("color_model", &["rgb", "hsv", "hls", "ycbcr", "gray"])?;
            spec.set_list("gamma", &["0.5", "1.0", "2.5", "dynamic"])?;
            spec.set_list("distortion_k1", &["-0.2", "0", "0.2"])?;
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    }
    Ok(spec)
}

/// The single configuration a preset name stands for in non-sweep contexts
/// (the gray variant for `optimized`, matching its throughput usage).
pub fn preset_config(name: &str) -> Result<PipelineConfig> {
    let spec = preset(name)?;
    let configs = spec.configs()?;
    Ok(configs.into_iter().last().expect("presets are non-empty"))
}

/// Everything a sweep needs besides the grid itself.
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub corpus_dir: PathBuf,
    pub out_dir: PathBuf,
    pub annotations: Option<PathBuf>,
    pub detector: Option<DetectorContract>,
    /// Reuse configs whose row file already exists.
    pub resume: bool,
    /// Worker threads for the config pool (`None` = rayon default).
    pub threads: Option<usize>,
    /// When set, each config also runs a staged throughput benchmark with
    /// this many repetitions and the fps column is filled in. Off by default
    /// so report bytes stay a pure function of spec, corpus, and detector.
    pub bench_reps: Option<usize>,
}

/// One config's failure, recorded without stopping the sweep.
#[derive(Debug, Clone)]
pub struct SweepFailure {
    pub config_id: String,
    pub error: String,
}

/// A finished sweep: ordered rows, recorded failures, written report paths.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<ReportRow>,
    pub failures: Vec<SweepFailure>,
    pub csv_path: PathBuf,
    pub markdown_path: PathBuf,
    pub svg_bytes_path: PathBuf,
    pub svg_fps_path: PathBuf,
}

const ROW_FILE: &str = "row.json";

/// One re-encoded corpus image inside a config's output directory.
struct VariantImage {
    stem: String,
    path: PathBuf,
    width: u32,
    height: u32,
    pixels: u64,
}

fn config_row(
    cfg: &PipelineConfig,
    opts: &SweepOptions,
    truth: Option<&AnnotationSet>,
    files: &[(String, PathBuf)],
) -> Result<ReportRow> {
    let config_id = cfg.config_id();
    let config_dir = opts.out_dir.join(&config_id);
    let row_path = config_dir.join(ROW_FILE);

    if opts.resume && row_path.is_file() {
        let text = std::fs::read_to_string(&row_path).map_err(Error::io_at(&row_path))?;
        let row: ReportRow = serde_json::from_str(&text)?;
        if row.config_id == config_id {
            return Ok(row);
        }
        return Err(Error::Schema(format!(
            "resume file {} belongs to config '{}'",
            row_path.display(),
            row.config_id
        )));
    }
    std::fs::create_dir_all(&config_dir).map_err(Error::io_at(&config_dir))?;

    let format = StorageFormat::for_config(cfg);
    let ext = format.extension();

    // Transform + re-encode every corpus image; processing within a config
    // parallelizes, results keyed by index for determinism.
    let processed: Result<Vec<VariantImage>> = files
        .par_iter()
        .map(|(stem, src)| {
            let image = codec::read_image(src)?;
            let variant = apply_config(&image, cfg)?;
            let out_path = config_dir.join(format!("{stem}.{ext}"));
            codec::write_image(&out_path, &variant, format)?;
            Ok(VariantImage {
                stem: stem.clone(),
                path: out_path,
                width: variant.width(),
                height: variant.height(),
                pixels: variant.pixel_count() as u64,
            })
        })
        .collect();
    let processed = processed?;

    let sizes = codec::compute_size_stats(&opts.corpus_dir, &config_dir)?;

    let map50 = match (&opts.detector, truth) {
        (Some(det), Some(truth)) => {
            let mut dims: HashMap<i64, (u32, u32)> = HashMap::new();
            let mut detections: Vec<Detection> = Vec::new();
            // Keep per-image results in stem order regardless of detector
            // scheduling.
            let results: Result<Vec<Vec<Detection>>> = processed
                .par_iter()
                .map(|img| {
                    let info = truth
                        .image_by_stem(&img.stem)
                        .ok_or_else(|| Error::Schema(format!("corpus image '{}' missing from annotations", img.stem)))?;
                    let meta_path = config_dir.join(format!("{}.meta.json", img.stem));
                    let meta = crate::bench::detector::DetectorMeta {
                        image_id: info.id,
                        stem: &img.stem,
                        config_id: config_id.clone(),
                        width: img.width,
                        height: img.height,
                        config: cfg,
                    };
                    std::fs::write(&meta_path, serde_json::to_vec_pretty(&meta)?)
                        .map_err(Error::io_at(&meta_path))?;
                    let payload = std::fs::metadata(&img.path).map(|m| m.len()).unwrap_or(0);
                    let mut found = det.detect(&img.path, &meta_path, img.pixels, payload)?;
                    for d in &mut found {
                        d.image_id = info.id;
                    }
                    Ok(found)
                })
                .collect();
            for (img, found) in processed.iter().zip(results?) {
                let info = truth.image_by_stem(&img.stem).expect("checked above");
                dims.insert(info.id, (img.width, img.height));
                detections.extend(found);
            }
            let detection_set = DetectionSet { detections, ..DetectionSet::default() };
            detection_set
                .save(&config_dir.join("detections.json"))?;
            let rescaled = truth.rescaled(&dims);
            let result = crate::eval::evaluate(&rescaled, &detection_set, 0.5)?;
            result.map
        }
        _ => None,
    };

    let fps = match opts.bench_reps {
        Some(reps) => {
            let det = match &opts.detector {
                Some(det) => det.clone(),
                None => DetectorContract::parse("stub:a=0,b=0,c=0")?,
            };
            let bench_opts = crate::bench::BenchOptions { reps, ..Default::default() };
            let report = crate::bench::run_bench(&opts.corpus_dir, cfg, &det, &bench_opts)?;
            Some(report.fps_median)
        }
        None => None,
    };

    let row = ReportRow::new(cfg, &sizes, map50, fps);
    let mut text = serde_json::to_string_pretty(&row)?;
    text.push('\n');
    std::fs::write(&row_path, text).map_err(Error::io_at(&row_path))?;
    Ok(row)
}

/// Runs the grid over the corpus. Failures are per-config: the sweep
/// finishes, reports cover the successful rows, and failures come back in
/// the outcome for the caller to surface.
pub fn run_sweep(spec: &SweepSpec, opts: &SweepOptions) -> Result<SweepOutcome> {
    let configs = spec.configs()?;
    let files = list_images(&opts.corpus_dir)?;
    if files.is_empty() {
        return Err(Error::Schema(format!("no images found in {}", opts.corpus_dir.display())));
    }
    let truth = match &opts.annotations {
        Some(path) => Some(AnnotationSet::load(path)?),
        None => None,
    };
    std::fs::create_dir_all(&opts.out_dir).map_err(Error::io_at(&opts.out_dir))?;

    let run = || -> Vec<(usize, std::result::Result<ReportRow, String>)> {
        configs
            .par_iter()
            .enumerate()
            .map(|(idx, cfg)| {
                let outcome = config_row(cfg, opts, truth.as_ref(), &files)
                    .map_err(|e| e.to_string());
                (idx, outcome)
            })
            .collect()
    };
    let mut results = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Schema(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    results.sort_by_key(|(idx, _)| *idx);

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for ((_, outcome), cfg) in results.into_iter().zip(&configs) {
        match outcome {
            Ok(row) => rows.push(row),
            Err(error) => failures.push(SweepFailure { config_id: cfg.config_id(), error }),
        }
    }

    let csv_path = opts.out_dir.join("report.csv");
    let markdown_path = opts.out_dir.join("report.md");
    let svg_bytes_path = opts.out_dir.join("scatter_bytes_map.svg");
    let svg_fps_path = opts.out_dir.join("scatter_fps_map.svg");
    if !rows.is_empty() {
        std::fs::write(&csv_path, report::render_csv(&rows)?).map_err(Error::io_at(&csv_path))?;
        std::fs::write(&markdown_path, report::render_markdown(&rows)?)
            .map_err(Error::io_at(&markdown_path))?;
        std::fs::write(&svg_bytes_path, report::render_svg(&rows, ScatterX::VariantBytes)?)
            .map_err(Error::io_at(&svg_bytes_path))?;
        std::fs::write(&svg_fps_path, report::render_svg(&rows, ScatterX::Fps)?)
            .map_err(Error::io_at(&svg_fps_path))?;
    }
    Ok(SweepOutcome { rows, failures, csv_path, markdown_path, svg_bytes_path, svg_fps_path })
}
