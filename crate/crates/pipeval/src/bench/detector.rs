//! Detector contracts for throughput runs: a deterministic latency-model
//! stub standing in for neural-network inference, and an external-process
//! detector invoked per image.

use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::annotations::{Detection, DetectionSet};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};

pub const DEFAULT_DETECTOR_TIMEOUT: Duration = Duration::from_secs(30);

/// Simulated inference latency: `t = a + b * pixels + c * payload_bytes`.
/// Coefficients are durations (b per pixel, c per byte); the stub consumes
/// that much wall time in a spin-wait and reports no detections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StubModel {
    pub a_ns: f64,
    pub b_ns_per_pixel: f64,
    pub c_ns_per_byte: f64,
}

impl StubModel {
    pub fn latency(&self, pixels: u64, payload_bytes: u64) -> Duration {
        let ns = self.a_ns + self.b_ns_per_pixel * pixels as f64 + self.c_ns_per_byte * payload_bytes as f64;
        Duration::from_nanos(ns.max(0.0).round() as u64)
    }

    /// Busy-waits for the modeled latency (sleep granularity is too coarse
    /// for per-image microsecond costs).
    pub fn simulate(&self, pixels: u64, payload_bytes: u64) {
        let t = self.latency(pixels, payload_bytes);
        let start = Instant::now();
        while start.elapsed() < t {
            std::hint::spin_loop();
        }
    }
}

/// External-process detector: `<command> --image <path> --meta <json-path>`,
/// detections JSON expected on standard output.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalDetector {
    pub argv: Vec<String>,
    pub timeout: Duration,
}

/// Per-image context handed to an external detector via `--meta`.
#[derive(Debug, Clone, Serialize)]
pub struct DetectorMeta<'a> {
    pub image_id: i64,
    pub stem: &'a str,
    pub config_id: String,
    pub width: u32,
    pub height: u32,
    pub config: &'a PipelineConfig,
}

/// One detector for a run: simulated latency or delegated inference.
#[derive(Debug, Clone, PartialEq)]
pub enum DetectorContract {
    Stub(StubModel),
    External(ExternalDetector),
}

fn parse_duration_ns(text: &str) -> Option<f64> {
    let text = text.trim();
    let (number, unit) = match text.find(|c: char| c.is_ascii_alphabetic()) {
        Some(i) => (&text[..i], &text[i..]),
        None => (text, ""),
    };
    let value: f64 = number.parse().ok()?;
    if !value.is_finite() || value < 0.0 {
        return None;
    }
    let scale = match unit {
        "" | "ns" => 1.0,
        "us" => 1e3,
        "ms" => 1e6,
        "s" => 1e9,
        _ => return None,
    };
    Some(value * scale)
}

impl DetectorContract {
    /// Parses a CLI descriptor: `stub:a=20ms,b=0,c=5ns` (durations in
    /// ns/us/ms/s, bare numbers are ns; b is per pixel, c per payload byte)
    /// or `cmd:<program and args>` (whitespace-split, no shell).
    pub fn parse(descriptor: &str) -> Result<DetectorContract> {
        let invalid = |reason: &str| Error::DetectorSpec(descriptor.to_string(), reason.to_string());
        if let Some(spec) = descriptor.strip_prefix("stub:") {
            let mut model = StubModel { a_ns: 0.0, b_ns_per_pixel: 0.0, c_ns_per_byte: 0.0 };
            for part in spec.split(',') {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                let (key, value) =
                    part.split_once('=').ok_or_else(|| invalid("expected key=value pairs"))?;
                let ns = parse_duration_ns(value)
                    .ok_or_else(|| invalid("durations are <number>[ns|us|ms|s], non-negative"))?;
                match key.trim() {
                    "a" => model.a_ns = ns,
                    "b" => model.b_ns_per_pixel = ns,
                    "c" => model.c_ns_per_byte = ns,
                    _ => return Err(invalid("known coefficients are a, b, c")),
                }
            }
            Ok(DetectorContract::Stub(model))
        } else if let Some(template) = descriptor.strip_prefix("cmd:") {
            let argv: Vec<String> = template.split_whitespace().map(str::to_string).collect();
            if argv.is_empty() {
                return Err(invalid("command template is empty"));
            }
            Ok(DetectorContract::External(ExternalDetector { argv, timeout: DEFAULT_DETECTOR_TIMEOUT }))
        } else {
            Err(invalid("expected 'stub:...' or 'cmd:...'"))
        }
    }

    /// Canonical descriptor used in reports and compatibility checks.
    pub fn descriptor(&self) -> String {
        match self {
            DetectorContract::Stub(m) => {
                format!("stub:a={}ns,b={}ns,c={}ns", m.a_ns, m.b_ns_per_pixel, m.c_ns_per_byte)
            }
            DetectorContract::External(e) => format!("cmd:{}", e.argv.join(" ")),
        }
    }

    /// Runs the detector on one encoded image. The stub consumes simulated
    /// time and returns no boxes; the external command is invoked with the
    /// image and meta paths and must print detections JSON on stdout.
    pub fn detect(
        &self,
        image_path: &Path,
        meta_path: &Path,
        pixels: u64,
        payload_bytes: u64,
    ) -> Result<Vec<Detection>> {
        match self {
            DetectorContract::Stub(model) => {
                model.simulate(pixels, payload_bytes);
                Ok(Vec::new())
            }
            DetectorContract::External(ext) => run_external(ext, image_path, meta_path),
        }
    }
}

fn run_external(ext: &ExternalDetector, image_path: &Path, meta_path: &Path) -> Result<Vec<Detection>> {
    let image_name = image_path.display().to_string();
    let fail = |reason: String| Error::DetectorFailed { image: image_name.clone(), reason };

    let mut cmd = Command::new(&ext.argv[0]);
    cmd.args(&ext.argv[1..])
        .arg("--image")
        .arg(image_path)
        .arg("--meta")
        .arg(meta_path)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    let mut child = cmd.spawn().map_err(|e| fail(format!("spawn failed: {e}")))?;

    // Drain pipes on threads so a large output cannot deadlock the child
    // while the parent polls for exit.
    let mut stdout_pipe = child.stdout.take().expect("stdout piped");
    let mut stderr_pipe = child.stderr.take().expect("stderr piped");
    let stdout_thread = std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stdout_pipe.read_to_end(&mut buf);
        buf
    });
    let stderr_thread = std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stderr_pipe.read_to_end(&mut buf);
        buf
    });

    let start = Instant::now();
    let status = loop {
        match child.try_wait().map_err(|e| fail(format!("wait failed: {e}")))? {
            Some(status) => break status,
            None => {
                if start.elapsed() > ext.timeout {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(fail(format!("timed out after {:?}", ext.timeout)));
                }
                std::thread::sleep(Duration::from_millis(2));
            }
        }
    };
    let stdout = stdout_thread.join().unwrap_or_default();
    let stderr = stderr_thread.join().unwrap_or_default();

    if !status.success() {
        let mut reason = format!("exit status {status}");
        let err_text = String::from_utf8_lossy(&stderr);
        let err_text = err_text.trim();
        if !err_text.is_empty() {
            let snippet: String = err_text.chars().take(200).collect();
            reason.push_str(&format!(": {snippet}"));
        }
        return Err(fail(reason));
    }
    let text = String::from_utf8(stdout).map_err(|_| fail("stdout is not UTF-8".into()))?;
    let set = DetectionSet::from_json(&text).map_err(|e| fail(format!("bad detections JSON: {e}")))?;
    Ok(set.detections)
}
