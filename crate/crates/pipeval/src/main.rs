//! Command-line front end: directory transforms, detection scoring, staged
//! throughput benchmarks, parameter-grid sweeps, report rendering, lens
//! warping, and corpus generation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pipeval::annotations::{AnnotationSet, DetectionSet};
use pipeval::bench::{compare_reports, run_bench, BenchOptions, BenchReport, DetectorContract};
use pipeval::codec::stats::{compute_size_stats, list_images};
use pipeval::codec::{read_image, write_image, StorageFormat};
use pipeval::config::PipelineConfig;
use pipeval::sweep::report::{parse_csv, render_csv, render_markdown, render_svg, ScatterX};
use pipeval::sweep::{preset, run_sweep, SweepOptions, SweepSpec};
use pipeval::transforms::distort::{distort, undistort, DistortionParams};
use pipeval::{apply_config, evaluate};

#[derive(Parser)]
#[command(
    name = "pipeval",
    version,
    about = "Image-acquisition pipeline evaluation: transforms, storage accounting, detection scoring, throughput benchmarks, and parameter sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Csv,
    Markdown,
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScatterAxis {
    Bytes,
    Fps,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a pipeline configuration to every image in a directory.
    Transform {
        /// Configuration file (key = value lines).
        #[arg(long)]
        config: PathBuf,
        /// Input directory of .png/.jpg/.qraw images.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Score detections against ground truth (mAP at a fixed IoU threshold).
    Eval {
        /// Ground-truth annotations JSON.
        #[arg(long)]
        gt: PathBuf,
        /// Detections JSON.
        #[arg(long)]
        det: PathBuf,
        /// Print one line per category.
        #[arg(long)]
        per_class: bool,
        /// IoU matching threshold.
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
        /// Print the full result as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Run the staged throughput benchmark for one configuration.
    Bench {
        /// Configuration file (key = value lines).
        #[arg(long)]
        config: PathBuf,
        /// Corpus directory.
        #[arg(long)]
        corpus: PathBuf,
        /// Detector contract: stub:a=..,b=..,c=.. or cmd:<program and args>.
        #[arg(long, default_value = "stub:a=0,b=0,c=0")]
        detector: String,
        /// Measured repetitions (a warm-up pass is discarded first).
        #[arg(long, default_value_t = 3)]
        reps: usize,
        /// Bounded queue capacity between stages.
        #[arg(long, default_value_t = 4)]
        queue: usize,
        /// Worker threads for every stage.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Compare against a previously saved JSON report and print the
        /// delta table.
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
    /// Expand a parameter grid over a corpus and emit trade-off reports.
    Sweep {
        /// Sweep spec file (key = value lines; repeated keys form lists).
        #[arg(long, conflicts_with = "preset")]
        spec: Option<PathBuf>,
        /// Named grid: baseline, optimized, or paper-grid.
        #[arg(long)]
        preset: Option<String>,
        /// Output directory (overrides the spec file's `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Corpus directory (overrides the spec file's `corpus`).
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Ground-truth annotations JSON enabling mAP columns.
        #[arg(long)]
        annotations: Option<PathBuf>,
        /// Detector contract enabling detection runs.
        #[arg(long)]
        detector: Option<String>,
        /// Skip configs whose row file already exists.
        #[arg(long)]
        resume: bool,
        /// Maximum grid size.
        #[arg(long)]
        cap: Option<usize>,
        /// Worker threads for the config pool.
        #[arg(long)]
        threads: Option<usize>,
        /// Also benchmark each config with this many repetitions and fill
        /// the fps column (makes report bytes timing-dependent).
        #[arg(long)]
        bench_reps: Option<usize>,
    },
    /// Re-render a report CSV as csv, markdown, or svg.
    Report {
        /// Input report CSV.
        #[arg(long)]
        rows: PathBuf,
        /// Output format.
        #[arg(long, value_enum)]
        kind: ReportFormat,
        /// X axis for svg output.
        #[arg(long, value_enum, default_value = "bytes")]
        x: ScatterAxis,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply (or invert) radial lens distortion to every image in a directory.
    Distort {
        /// Radial coefficient; negative = barrel, positive = pincushion.
        #[arg(long, allow_negative_numbers = true)]
        k1: f64,
        /// Correct instead of synthesize.
        #[arg(long)]
        invert: bool,
        /// Input directory.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate the bundled synthetic corpus (images, annotations, bands).
    GenCorpus {
        /// Target directory.
        #[arg(long, default_value = "corpus")]
        out: PathBuf,
        /// Generator seed.
        #[arg(long, default_value_t = pipeval::corpus::DEFAULT_SEED)]
        seed: u64,
    },
}

/// Input the user got wrong at the command level (exit 1), as opposed to bad
/// data encountered while running (exit 2).
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

fn write_or_print(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_transform(config: &Path, input: &Path, out: &Path) -> anyhow::Result<()> {
    let cfg = PipelineConfig::from_file(config)?;
    let files = list_images(input)?;
    if files.is_empty() {
        return Err(usage(format!("no images found in {}", input.display())));
    }
    std::fs::create_dir_all(out)?;
    let format = StorageFormat::for_config(&cfg);
    for (stem, path) in &files {
        let img = read_image(path)?;
        let variant = apply_config(&img, &cfg)?;
        write_image(&out.join(format!("{stem}.{}", format.extension())), &variant, format)?;
    }
    let stats = compute_size_stats(input, out)?;
    println!(
        "{} images -> {} [{}]",
        files.len(),
        out.display(),
        cfg.config_id()
    );
    println!(
        "baseline {} B, variant {} B, reduction {:.4}",
        stats.baseline_total, stats.variant_total, stats.reduction
    );
    Ok(())
}

fn cmd_eval(gt: &Path, det: &Path, per_class: bool, iou: f64, json: bool) -> anyhow::Result<()> {
    let truth = AnnotationSet::load(gt)?;
    let detections = DetectionSet::load(det)?;
    let result = evaluate(&truth, &detections, iou)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&result)?);
        return Ok(());
    }
    match result.map {
        Some(map) => println!("map@{:.2} {:.6}", result.iou_threshold, map),
        None => println!("map@{:.2} n/a (no ground truth)", result.iou_threshold),
    }
    if per_class {
        let names: std::collections::HashMap<i64, &str> =
            truth.categories.iter().map(|c| (c.id, c.name.as_str())).collect();
        for (id, cat) in &result.categories {
            let ap = cat
                .average_precision
                .map_or("n/a".to_string(), |v| format!("{v:.6}"));
            println!(
                "category {id} ({}): ap {ap} tp {} fp {} missed {}",
                names.get(id).copied().unwrap_or("?"),
                cat.true_positives,
                cat.false_positives,
                cat.missed
            );
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    config: &Path,
    corpus: &Path,
    detector: &str,
    reps: usize,
    queue: usize,
    workers: usize,
    out: Option<&Path>,
    baseline: Option<&Path>,
) -> anyhow::Result<()> {
    let cfg = PipelineConfig::from_file(config)?;
    let det = DetectorContract::parse(detector)?;
    let mut opts = BenchOptions { reps, queue_capacity: queue, ..BenchOptions::default() };
    opts.set_all_workers(workers);
    let report = run_bench(corpus, &cfg, &det, &opts)?;
    let json = serde_json::to_string_pretty(&report)?;
    write_or_print(out, &format!("{json}\n"))?;
    if let Some(path) = baseline {
        let text = std::fs::read_to_string(path)?;
        let before: BenchReport = serde_json::from_str(&text)?;
        let comparison = compare_reports(&before, &report)?;
        println!("{comparison}");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    spec_path: Option<&Path>,
    preset_name: Option<&str>,
    out: Option<PathBuf>,
    corpus: Option<PathBuf>,
    annotations: Option<PathBuf>,
    detector: Option<&str>,
    resume: bool,
    cap: Option<usize>,
    threads: Option<usize>,
    bench_reps: Option<usize>,
) -> anyhow::Result<u8> {
    let mut spec = match (spec_path, preset_name) {
        (Some(path), None) => SweepSpec::from_file(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => SweepSpec::default(),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    if let Some(cap) = cap {
        spec.cap = cap;
    }
    let corpus_dir = corpus
        .or_else(|| spec.corpus.clone())
        .ok_or_else(|| usage("no corpus: pass --corpus or set `corpus =` in the spec file"))?;
    let out_dir = out
        .or_else(|| spec.out_dir.clone())
        .ok_or_else(|| usage("no output directory: pass --out or set `out =` in the spec file"))?;
    let annotations = annotations.or_else(|| spec.annotations.clone());
    let detector = match detector.map(str::to_string).or_else(|| spec.detector.clone()) {
        Some(descriptor) => Some(DetectorContract::parse(&descriptor)?),
        None => None,
    };

    let opts = SweepOptions {
        corpus_dir,
        out_dir,
        annotations,
        detector,
        resume,
        threads,
        bench_reps,
    };
    let outcome = run_sweep(&spec, &opts)?;
    println!(
        "{} rows, {} failures -> {}",
        outcome.rows.len(),
        outcome.failures.len(),
        opts.out_dir.display()
    );
    if !outcome.rows.is_empty() {
        println!("  {}", outcome.csv_path.display());
        println!("  {}", outcome.markdown_path.display());
        println!("  {}", outcome.svg_bytes_path.display());
        println!("  {}", outcome.svg_fps_path.display());
    }
    for failure in &outcome.failures {
        eprintln!("failed {}: {}", failure.config_id, failure.error);
    }
    Ok(if outcome.failures.is_empty() { 0 } else { 3 })
}

fn cmd_report(
    rows_path: &Path,
    kind: ReportFormat,
    x: ScatterAxis,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(rows_path)?;
    let rows = parse_csv(&text)?;
    let rendered = match kind {
        ReportFormat::Csv => render_csv(&rows)?,
        ReportFormat::Markdown => render_markdown(&rows)?,
        ReportFormat::Svg => {
            let axis = match x {
                ScatterAxis::Bytes => ScatterX::VariantBytes,
                ScatterAxis::Fps => ScatterX::Fps,
            };
            render_svg(&rows, axis)?
        }
    };
    write_or_print(out, &rendered)
}

fn cmd_distort(k1: f64, invert: bool, input: &Path, out: &Path) -> anyhow::Result<()> {
    let params = DistortionParams::new(k1)?;
    let files = list_images(input)?;
    if files.is_empty() {
        return Err(usage(format!("no images found in {}", input.display())));
    }
    std::fs::create_dir_all(out)?;
    let mut total_failures = 0u64;
    for (stem, path) in &files {
        let img = read_image(path)?;
        let (warped, format) = if invert {
            (undistort(&img, params)?, StorageFormat::Png)
        } else {
            let d = distort(&img, params)?;
            total_failures += d.newton_failures;
            (d.image, StorageFormat::Png)
        };
        write_image(&out.join(format!("{stem}.png")), &warped, format)?;
    }
    println!(
        "{} images {} with k1={k1} -> {}",
        files.len(),
        if invert { "corrected" } else { "distorted" },
        out.display()
    );
    if total_failures > 0 {
        eprintln!("warning: {total_failures} radius inversions did not converge");
    }
    Ok(())
}

fn cmd_gen_corpus(out: &Path, seed: u64) -> anyhow::Result<()> {
    let set = pipeval::corpus::generate(out, seed)?;
    println!(
        "{} images, {} objects, {} band files -> {}",
        set.images.len(),
        set.annotations.len(),
        pipeval::corpus::BAND_FRAMES * pipeval::corpus::BAND_SUFFIXES.len(),
        out.display()
    );
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Transform { config, input, out } => {
            cmd_transform(&config, &input, &out)?;
            Ok(0)
        }
        Command::Eval { gt, det, per_class, iou, json } => {
            cmd_eval(&gt, &det, per_class, iou, json)?;
            Ok(0)
        }
        Command::Bench { config, corpus, detector, reps, queue, workers, out, baseline } => {
            cmd_bench(
                &config,
                &corpus,
                &detector,
                reps,
                queue,
                workers,
                out.as_deref(),
                baseline.as_deref(),
            )?;
            Ok(0)
        }
        Command::Sweep {
            spec,
            preset,
            out,
            corpus,
            annotations,
            detector,
            resume,
            cap,
            threads,
            bench_reps,
        } => cmd_sweep(
            spec.as_deref(),
            preset.as_deref(),
            out,
            corpus,
            annotations,
            detector.as_deref(),
            resume,
            cap,
            threads,
            bench_reps,
        ),
        Command::Report { rows, kind, x, out } => {
            cmd_report(&rows, kind, x, out.as_deref())?;
            Ok(0)
        }
        Command::Distort { k1, invert, input, out } => {
            cmd_distort(k1, invert, &input, &out)?;
            Ok(0)
        }
        Command::GenCorpus { out, seed } => {
            cmd_gen_corpus(&out, seed)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) if err.is::<UsageError>() => {
            eprintln!("usage error: {err}");
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
