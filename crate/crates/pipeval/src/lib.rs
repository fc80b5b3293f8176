//! Image-acquisition pipeline evaluation: configurable transforms
//! (quantization, gamma, color models, resizing, lens distortion,
//! multispectral fusion), storage codecs with size accounting, detection
//! scoring via mAP@0.5, staged throughput benchmarks, and parameter sweeps
//! that tie storage, speed, and accuracy together.

pub mod annotations;
pub mod bench;
pub mod buffer;
pub mod codec;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod sweep;
pub mod transforms;

pub use annotations::{AnnotationSet, BoundingBox, Detection, DetectionSet};
pub use buffer::{ColorModel, ImageBuffer};
pub use config::{GammaMode, PipelineConfig};
pub use bench::{compare_reports, run_bench, BenchOptions, BenchReport, DetectorContract};
pub use error::{Error, Result};
pub use eval::{evaluate, iou, EvalResult};
pub use sweep::{preset, run_sweep, SweepOptions, SweepOutcome, SweepSpec};
pub use transforms::apply_config;
