//! Staged throughput benchmark: read → decode → transform → encode →
//! transfer_model → detect → post, as concurrent workers joined by bounded
//! queues so end-to-end frames-per-second reflects the slowest stage.

pub mod detector;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use crossbeam_channel::{bounded, Receiver, Sender};
use serde::{Deserialize, Serialize};

use crate::annotations::{Detection, DetectionSet};
use crate::buffer::ImageBuffer;
use crate::codec::{self, stats::list_images, StorageFormat};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::transforms::apply_config;
pub use detector::{DetectorContract, ExternalDetector, StubModel};

/// Pipeline stages, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Read,
    Decode,
    Transform,
    Encode,
    TransferModel,
    Detect,
    Post,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Read,
        Stage::Decode,
        Stage::Transform,
        Stage::Encode,
        Stage::TransferModel,
        Stage::Detect,
        Stage::Post,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Read => "read",
            Stage::Decode => "decode",
            Stage::Transform => "transform",
            Stage::Encode => "encode",
            Stage::TransferModel => "transfer_model",
            Stage::Detect => "detect",
            Stage::Post => "post",
        }
    }

    fn index(self) -> usize {
        Stage::ALL.iter().position(|&s| s == self).expect("stage listed")
    }
}

/// One stage's wall time and byte flow for one image.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub wall_ns: u64,
    pub bytes_in: u64,
    pub bytes_out: u64,
}

/// Wall-time and byte aggregates for one stage over a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageAggregate {
    pub mean_ns: f64,
    pub p50_ns: u64,
    pub p95_ns: u64,
    /// Byte totals for one corpus pass.
    pub bytes_in: u64,
    pub bytes_out: u64,
}

/// Throughput result for one configuration over a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config_id: String,
    pub corpus: String,
    pub corpus_size: usize,
    pub reps: usize,
    pub detector: String,
    pub queue_capacity: usize,
    pub stage_workers: BTreeMap<String, usize>,
    pub stages: BTreeMap<String, StageAggregate>,
    /// End-to-end corpus wall time per measured repetition.
    pub wall_ns_per_rep: Vec<u64>,
    /// Frames per second per measured repetition, with the median (the
    /// headline figure) and mean both reported.
    pub fps_per_rep: Vec<f64>,
    pub fps_median: f64,
    pub fps_mean: f64,
    pub detector_errors: usize,
    /// Captured detector output (external detectors only), stable across
    /// repetitions and worker counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detections: Option<DetectionSet>,
}

/// Knobs for a benchmark run.
#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub reps: usize,
    pub queue_capacity: usize,
    /// Worker threads per stage (all default 1).
    pub stage_workers: [usize; 7],
    /// Where encoded variants and detector metadata are written; a temporary
    /// directory is used when unset.
    pub work_dir: Option<PathBuf>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions { reps: 3, queue_capacity: 4, stage_workers: [1; 7], work_dir: None }
    }
}

impl BenchOptions {
    pub fn set_workers(&mut self, stage: Stage, count: usize) {
        self.stage_workers[stage.index()] = count.max(1);
    }

    pub fn set_all_workers(&mut self, count: usize) {
        self.stage_workers = [count.max(1); 7];
    }
}

struct WorkItem {
    index: usize,
    image_id: i64,
    stem: String,
    source_path: PathBuf,
    encoded_path: PathBuf,
    meta_path: PathBuf,
    raw: Vec<u8>,
    buffer: Option<ImageBuffer>,
    payload: Vec<u8>,
    pixels: u64,
    width: u32,
    height: u32,
    detections: Vec<Detection>,
    detector_error: Option<String>,
    timings: Vec<StageTiming>,
}

struct PipelineCtx<'a> {
    cfg: &'a PipelineConfig,
    config_id: String,
    detector: &'a DetectorContract,
    format: StorageFormat,
}

fn stage_apply(stage: Stage, item: &mut WorkItem, ctx: &PipelineCtx) -> Result<(u64, u64)> {
    match stage {
        Stage::Read => {
            item.raw = std::fs::read(&item.source_path).map_err(Error::io_at(&item.source_path))?;
            let n = item.raw.len() as u64;
            Ok((n, n))
        }
        Stage::Decode => {
            let encoded_len = item.raw.len() as u64;
            let buf = codec::decode(&item.raw)?;
            item.raw = Vec::new();
            let raw_len = buf.samples().len() as u64;
            item.buffer = Some(buf);
            Ok((encoded_len, raw_len))
        }
        Stage::Transform => {
            let buf = item.buffer.take().expect("decode ran");
            let bytes_in = buf.samples().len() as u64;
            let out = apply_config(&buf, ctx.cfg)?;
            let bytes_out = out.samples().len() as u64;
            item.pixels = out.pixel_count() as u64;
            item.width = out.width();
            item.height = out.height();
            item.buffer = Some(out);
            Ok((bytes_in, bytes_out))
        }
        Stage::Encode => {
            let buf = item.buffer.take().expect("transform ran");
            let bytes_in = buf.samples().len() as u64;
            item.payload = codec::encode(&buf, ctx.format)?.bytes;
            std::fs::write(&item.encoded_path, &item.payload).map_err(Error::io_at(&item.encoded_path))?;
            let meta = detector::DetectorMeta {
                image_id: item.image_id,
                stem: &item.stem,
                config_id: ctx.config_id.clone(),
                width: item.width,
                height: item.height,
                config: ctx.cfg,
            };
            let meta_json = serde_json::to_vec_pretty(&meta)?;
            std::fs::write(&item.meta_path, meta_json).map_err(Error::io_at(&item.meta_path))?;
            Ok((bytes_in, item.payload.len() as u64))
        }
        Stage::TransferModel => {
            // Models a host→accelerator copy of the encoded payload.
            let moved = std::hint::black_box(item.payload.clone());
            let n = moved.len() as u64;
            item.payload = moved;
            Ok((n, n))
        }
        Stage::Detect => {
            let n = item.payload.len() as u64;
            let found =
                ctx.detector.detect(&item.encoded_path, &item.meta_path, item.pixels, n)?;
            item.detections = found;
            Ok((n, 0))
        }
        Stage::Post => {
            // Normalizes detector output into the shared schema and accounts
            // for its serialized hand-off size.
            for det in &mut item.detections {
                det.image_id = item.image_id;
            }
            item.detections.sort_by(|a, b| {
                b.score
                    .partial_cmp(&a.score)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.category_id.cmp(&b.category_id))
                    .then(a.bbox.x.partial_cmp(&b.bbox.x).unwrap_or(std::cmp::Ordering::Equal))
            });
            let json = serde_json::to_vec(&item.detections)?;
            Ok((0, json.len() as u64))
        }
    }
}

struct PassResult {
    wall_ns: u64,
    items: Vec<WorkItem>,
    detector_failures: usize,
}

fn run_pass(
    files: &[(String, PathBuf)],
    ctx: &PipelineCtx,
    run_dir: &Path,
    opts: &BenchOptions,
) -> Result<PassResult> {
    let n = files.len();
    let errors: Mutex<Vec<Error>> = Mutex::new(Vec::new());
    let collected: Mutex<Vec<WorkItem>> = Mutex::new(Vec::with_capacity(n));

    let started = Instant::now();
    std::thread::scope(|scope| {
        // One bounded channel in front of every stage, plus one feeding the
        // collector.
        let mut channels: Vec<(Sender<WorkItem>, Receiver<WorkItem>)> = Vec::new();
        for _ in 0..=Stage::ALL.len() {
            channels.push(bounded(opts.queue_capacity));
        }
        let ext = ctx.format.extension();

        for (i, &stage) in Stage::ALL.iter().enumerate() {
            for _ in 0..opts.stage_workers[i] {
                let rx = channels[i].1.clone();
                let tx = channels[i + 1].0.clone();
                let errors = &errors;
                scope.spawn(move || {
                    while let Ok(mut item) = rx.recv() {
                        let begin = Instant::now();
                        let outcome = stage_apply(stage, &mut item, ctx);
                        let wall_ns = begin.elapsed().as_nanos() as u64;
                        let (bytes_in, bytes_out) = match outcome {
                            Ok(flow) => flow,
                            Err(Error::DetectorFailed { reason, .. }) if stage == Stage::Detect => {
                                item.detector_error = Some(reason);
                                (item.payload.len() as u64, 0)
                            }
                            Err(e) => {
                                errors.lock().expect("error sink").push(e);
                                continue;
                            }
                        };
                        item.timings.push(StageTiming { stage, wall_ns, bytes_in, bytes_out });
                        if tx.send(item).is_err() {
                            break;
                        }
                    }
                });
            }
        }
        let source = channels[0].0.clone();
        let sink = channels[Stage::ALL.len()].1.clone();
        drop(channels);

        let collector = scope.spawn(move || {
            let mut got = Vec::with_capacity(n);
            while let Ok(item) = sink.recv() {
                got.push(item);
            }
            got
        });

        for (index, (stem, path)) in files.iter().enumerate() {
            let item = WorkItem {
                index,
                image_id: index as i64,
                stem: stem.clone(),
                source_path: path.clone(),
                encoded_path: run_dir.join(format!("{stem}.{ext}")),
                meta_path: run_dir.join(format!("{stem}.meta.json")),
                raw: Vec::new(),
                buffer: None,
                payload: Vec::new(),
                pixels: 0,
                width: 0,
                height: 0,
                detections: Vec::new(),
                detector_error: None,
                timings: Vec::new(),
            };
            if source.send(item).is_err() {
                break;
            }
        }
        drop(source);

        let got = collector.join().expect("collector thread");
        collected.lock().expect("collector sink").extend(got);
    });
    let wall_ns = started.elapsed().as_nanos() as u64;

    if let Some(e) = errors.into_inner().expect("error sink").into_iter().next() {
        return Err(e);
    }
    let mut items = collected.into_inner().expect("collector sink");
    items.sort_by_key(|item| item.index);
    let detector_failures = items.iter().filter(|i| i.detector_error.is_some()).count();
    if detector_failures * 10 > n {
        return Err(Error::DetectorErrorRate { failed: detector_failures, total: n });
    }
    Ok(PassResult { wall_ns, items, detector_failures })
}

fn percentile(sorted: &[u64], q: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn median_f64(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = sorted.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn pass_detections(items: &[WorkItem]) -> Vec<Vec<Detection>> {
    items.iter().map(|i| i.detections.clone()).collect()
}

/// Times `reps` full corpus passes (after one discarded warm-up pass) of the
/// staged pipeline under `cfg`, with `det` as the detect stage.
pub fn run_bench(
    corpus_dir: &Path,
    cfg: &PipelineConfig,
    det: &DetectorContract,
    opts: &BenchOptions,
) -> Result<BenchReport> {
    cfg.validate()?;
    if opts.reps < 3 {
        return Err(Error::Schema(format!("bench needs at least 3 repetitions, got {}", opts.reps)));
    }
    let files = list_images(corpus_dir)?;
    if files.is_empty() {
        return Err(Error::Schema(format!("no images found in {}", corpus_dir.display())));
    }

    let temp;
    let run_dir: &Path = match &opts.work_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(Error::io_at(dir))?;
            dir
        }
        None => {
            temp = tempfile::tempdir().map_err(Error::Io)?;
            temp.path()
        }
    };

    let ctx = PipelineCtx {
        cfg,
        config_id: cfg.config_id(),
        detector: det,
        format: StorageFormat::for_config(cfg),
    };

    // Warm-up pass: discarded entirely.
    run_pass(&files, &ctx, run_dir, opts)?;

    let mut walls = Vec::with_capacity(opts.reps);
    let mut per_stage_walls: BTreeMap<Stage, Vec<u64>> =
        Stage::ALL.iter().map(|&s| (s, Vec::new())).collect();
    let mut per_stage_bytes: BTreeMap<Stage, (u64, u64)> = BTreeMap::new();
    let mut detector_errors = 0;
    let mut first_detections: Option<Vec<Vec<Detection>>> = None;

    for _rep in 0..opts.reps {
        let pass = run_pass(&files, &ctx, run_dir, opts)?;
        walls.push(pass.wall_ns);
        detector_errors = pass.detector_failures;
        per_stage_bytes.clear();
        for item in &pass.items {
            for t in &item.timings {
                per_stage_walls.get_mut(&t.stage).expect("stage known").push(t.wall_ns);
                let slot = per_stage_bytes.entry(t.stage).or_insert((0, 0));
                slot.0 += t.bytes_in;
                slot.1 += t.bytes_out;
            }
        }
        let found = pass_detections(&pass.items);
        match &first_detections {
            None => first_detections = Some(found),
            Some(reference) => {
                if *reference != found {
                    let stem = reference
                        .iter()
                        .zip(&found)
                        .zip(&pass.items)
                        .find(|((a, b), _)| a != b)
                        .map(|(_, item)| item.stem.clone())
                        .unwrap_or_default();
                    return Err(Error::DetectorFailed {
                        image: stem,
                        reason: "output differs between repetitions".into(),
                    });
                }
            }
        }
    }

    let stages: BTreeMap<String, StageAggregate> = Stage::ALL
        .iter()
        .map(|&stage| {
            let mut wall: Vec<u64> = per_stage_walls.remove(&stage).unwrap_or_default();
            wall.sort_unstable();
            let mean_ns = if wall.is_empty() {
                0.0
            } else {
                wall.iter().map(|&w| w as f64).sum::<f64>() / wall.len() as f64
            };
            let (bytes_in, bytes_out) = per_stage_bytes.get(&stage).copied().unwrap_or((0, 0));
            let agg = StageAggregate {
                mean_ns,
                p50_ns: percentile(&wall, 0.50),
                p95_ns: percentile(&wall, 0.95),
                bytes_in,
                bytes_out,
            };
            (stage.name().to_string(), agg)
        })
        .collect();

    let n = files.len();
    let fps_per_rep: Vec<f64> = walls.iter().map(|&w| n as f64 / (w as f64 / 1e9)).collect();
    let fps_median = median_f64(&fps_per_rep);
    let fps_mean = fps_per_rep.iter().sum::<f64>() / fps_per_rep.len() as f64;

    let detections = match det {
        DetectorContract::External(_) => {
            let all: Vec<Detection> =
                first_detections.unwrap_or_default().into_iter().flatten().collect();
            Some(DetectionSet { detections: all, ..DetectionSet::default() })
        }
        DetectorContract::Stub(_) => None,
    };

    let stage_workers = Stage::ALL
        .iter()
        .enumerate()
        .map(|(i, &s)| (s.name().to_string(), opts.stage_workers[i]))
        .collect();

    Ok(BenchReport {
        config_id: ctx.config_id,
        corpus: corpus_dir.display().to_string(),
        corpus_size: n,
        reps: opts.reps,
        detector: det.descriptor(),
        queue_capacity: opts.queue_capacity,
        stage_workers,
        stages,
        wall_ns_per_rep: walls,
        fps_per_rep,
        fps_median,
        fps_mean,
        detector_errors,
        detections,
    })
}

/// One line of a report comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub label: String,
    pub before: f64,
    pub after: f64,
    pub delta: String,
}

/// Side-by-side deltas between two runs of the same corpus and detector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub before_config: String,
    pub after_config: String,
    pub rows: Vec<CompareRow>,
}

/// Integer percentage change with explicit sign, e.g. `+12 %`; half-way
/// values round away from zero.
pub fn format_delta(before: f64, after: f64) -> String {
    if before == 0.0 {
        return "n/a".into();
    }
    let pct = ((after - before) / before * 100.0).round();
    if pct == 0.0 {
        "0 %".into()
    } else {
        format!("{pct:+.0} %")
    }
}

/// Compares two benchmark reports stage by stage and end to end.
pub fn compare_reports(before: &BenchReport, after: &BenchReport) -> Result<Comparison> {
    if before.corpus != after.corpus || before.corpus_size != after.corpus_size {
        return Err(Error::CorpusMismatch(before.corpus.clone(), after.corpus.clone()));
    }
    if before.detector != after.detector {
        return Err(Error::CorpusMismatch(before.detector.clone(), after.detector.clone()));
    }
    let mut rows = vec![CompareRow {
        label: "end_to_end_fps".into(),
        before: before.fps_median,
        after: after.fps_median,
        delta: format_delta(before.fps_median, after.fps_median),
    }];
    for stage in Stage::ALL {
        let name = stage.name();
        let (a, b) = match (before.stages.get(name), after.stages.get(name)) {
            (Some(a), Some(b)) => (a, b),
            _ => continue,
        };
        let (before_ms, after_ms) = (a.mean_ns / 1e6, b.mean_ns / 1e6);
        rows.push(CompareRow {
            label: format!("{name}_mean_ms"),
            before: before_ms,
            after: after_ms,
            delta: format_delta(before_ms, after_ms),
        });
    }
    Ok(Comparison {
        before_config: before.config_id.clone(),
        after_config: after.config_id.clone(),
        rows,
    })
}

impl std::fmt::Display for Comparison {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "| metric | {} | {} | delta |", self.before_config, self.after_config)?;
        writeln!(f, "| --- | ---: | ---: | ---: |")?;
        for row in &self.rows {
            writeln!(
                f,
                "| {} | {:.2} | {:.2} ({}) | {} |",
                row.label, row.before, row.after, row.delta, row.delta
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buffer::ColorModel;

    fn make_corpus(dir: &Path, count: usize) -> usize {
        for i in 0..count {
            let w = 48u32;
            let h = 32u32;
            let samples: Vec<u8> = (0..3 * w * h)
                .map(|k| ((k as u64 * 31 + i as u64 * 97) % 251) as u8)
                .collect();
            let buf = ImageBuffer::new(w, h, ColorModel::Rgb, 8, samples).unwrap();
            codec::write_image(&dir.join(format!("img_{i:03}.png")), &buf, StorageFormat::Png)
                .unwrap();
        }
        count
    }

    fn fast_stub() -> DetectorContract {
        DetectorContract::Stub(StubModel { a_ns: 0.0, b_ns_per_pixel: 0.0, c_ns_per_byte: 0.0 })
    }

    #[test]
    fn bench_reports_all_stages_and_positive_fps() {
        let dir = tempfile::tempdir().unwrap();
        let n = make_corpus(dir.path(), 4);
        let report =
            run_bench(dir.path(), &PipelineConfig::default(), &fast_stub(), &BenchOptions::default())
                .unwrap();
        assert_eq!(report.corpus_size, n);
        assert_eq!(report.stages.len(), 7);
        assert!(report.fps_median > 0.0);
        assert!(report.fps_mean > 0.0);
        assert_eq!(report.fps_per_rep.len(), 3);
        // Raw sample flow: decode emits 3 channels * 48 * 32 per image.
        let decode = &report.stages["decode"];
        assert_eq!(decode.bytes_out, (3 * 48 * 32 * n) as u64);
        // Read hands bytes through unchanged.
        let read = &report.stages["read"];
        assert_eq!(read.bytes_in, read.bytes_out);
        // Encode wrote real files whose sizes it reports.
        let encode = &report.stages["encode"];
        assert!(encode.bytes_out > 0);
    }

    #[test]
    fn byte_accounting_matches_disk_sizes() {
        let dir = tempfile::tempdir().unwrap();
        make_corpus(dir.path(), 3);
        let out = tempfile::tempdir().unwrap();
        let mut opts = BenchOptions { work_dir: Some(out.path().to_path_buf()), ..Default::default() };
        opts.reps = 3;
        let report =
            run_bench(dir.path(), &PipelineConfig::default(), &fast_stub(), &opts).unwrap();
        let on_disk: u64 = list_images(out.path())
            .unwrap()
            .iter()
            .map(|(_, p)| std::fs::metadata(p).unwrap().len())
            .sum();
        assert_eq!(report.stages["encode"].bytes_out, on_disk);
        let sources: u64 = list_images(dir.path())
            .unwrap()
            .iter()
            .map(|(_, p)| std::fs::metadata(p).unwrap().len())
            .sum();
        assert_eq!(report.stages["read"].bytes_in, sources);
    }

    #[test]
    fn too_few_reps_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        make_corpus(dir.path(), 1);
        let opts = BenchOptions { reps: 2, ..Default::default() };
        assert!(run_bench(dir.path(), &PipelineConfig::default(), &fast_stub(), &opts).is_err());
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(run_bench(dir.path(), &PipelineConfig::default(), &fast_stub(), &BenchOptions::default())
            .is_err());
    }

    #[test]
    fn delta_formatting_matches_published_rows() {
        assert_eq!(format_delta(25.0, 28.0), "+12 %");
        assert_eq!(format_delta(14.0, 16.0), "+14 %");
        assert_eq!(format_delta(10.0, 10.0), "0 %");
        assert_eq!(format_delta(10.0, 9.0), "-10 %");
        assert_eq!(format_delta(10.0, 10.04), "0 %");
        assert_eq!(format_delta(200.0, 201.0), "+1 %");
    }

    #[test]
    fn identical_reports_compare_to_all_zero() {
        let dir = tempfile::tempdir().unwrap();
        make_corpus(dir.path(), 2);
        let report =
            run_bench(dir.path(), &PipelineConfig::default(), &fast_stub(), &BenchOptions::default())
                .unwrap();
        let cmp = compare_reports(&report, &report).unwrap();
        assert_eq!(cmp.rows[0].delta, "0 %");
        assert!(cmp.rows.iter().all(|r| r.delta == "0 %"));
    }

    #[test]
    fn mismatched_corpora_refuse_to_compare() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        make_corpus(dir_a.path(), 2);
        make_corpus(dir_b.path(), 2);
        let a = run_bench(dir_a.path(), &PipelineConfig::default(), &fast_stub(), &BenchOptions::default())
            .unwrap();
        let b = run_bench(dir_b.path(), &PipelineConfig::default(), &fast_stub(), &BenchOptions::default())
            .unwrap();
        assert!(matches!(compare_reports(&a, &b), Err(Error::CorpusMismatch(..))));
    }

    #[test]
    fn detections_are_stable_across_worker_counts() {
        let dir = tempfile::tempdir().unwrap();
        make_corpus(dir.path(), 6);
        let script_dir = tempfile::tempdir().unwrap();
        let script = script_dir.path().join("echo-detector");
        // Emits one box whose x coordinate is the image's width, derived
        // from the meta file: deterministic, image-dependent output.
        std::fs::write(
            &script,
            "#!/bin/sh\nW=$(grep -o '\"width\": [0-9]*' \"$4\" | grep -o '[0-9]*')\n\
             echo \"{\\\"detections\\\": [{\\\"image_id\\\": 0, \\\"category_id\\\": 1, \\\"bbox\\\": [$W.0, 1.0, 2.0, 2.0], \\\"score\\\": 0.5}]}\"\n",
        )
        .unwrap();
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755)).unwrap();
        let det = DetectorContract::parse(&format!("cmd:{}", script.display())).unwrap();

        let serial = run_bench(dir.path(), &PipelineConfig::default(), &det, &BenchOptions::default())
            .unwrap();
        let mut opts = BenchOptions::default();
        opts.set_all_workers(3);
        opts.queue_capacity = 2;
        let parallel = run_bench(dir.path(), &PipelineConfig::default(), &det, &opts).unwrap();
        let a = serial.detections.expect("external detections captured");
        let b = parallel.detections.expect("external detections captured");
        assert_eq!(a, b);
        assert_eq!(a.detections.len(), 6);
        // Post normalizes ids to the per-run image identity.
        assert!(a.detections.iter().enumerate().all(|(i, d)| d.image_id == i as i64));
    }

    #[test]
    fn failing_detector_rate_aborts_the_run() {
        let dir = tempfile::tempdir().unwrap();
        make_corpus(dir.path(), 3);
        let script_dir = tempfile::tempdir().unwrap();
        let script = script_dir.path().join("always-fails");
        std::fs::write(&script, "#!/bin/sh\nexit 1\n").unwrap();
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755)).unwrap();
        let det = DetectorContract::parse(&format!("cmd:{}", script.display())).unwrap();
        let err = run_bench(dir.path(), &PipelineConfig::default(), &det, &BenchOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::DetectorErrorRate { failed: 3, total: 3 }));
    }
}
