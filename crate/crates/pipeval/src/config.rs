//! Pipeline configuration: the seven acquisition parameters, their
//! identifiers, and the plain-text `key = value` file format.

use std::fmt;
use std::path::Path;

use crate::buffer::ColorModel;
use crate::error::{Error, Result};

/// Gamma correction setting.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "lowercase")]
pub enum GammaMode {
    /// Leave intensities untouched.
    None,
    /// Fixed exponent in (0, 10].
    Fixed(f64),
    /// Per-image exponent chosen so the mean luma lands at mid gray.
    Dynamic,
}

impl GammaMode {
    fn id_segment(&self) -> String {
        match self {
            GammaMode::None => "g1".to_owned(),
            GammaMode::Fixed(g) => format!("g{g}"),
            GammaMode::Dynamic => "gdyn".to_owned(),
        }
    }
}

/// One point in the acquisition-parameter space.
///
/// `new`-style constructors normalize no-op settings (`Fixed(1.0)` gamma,
/// scale factor 1) to their canonical `None` forms so that equal pipelines
/// compare equal and share a [`config_id`](PipelineConfig::config_id).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PipelineConfig {
    /// Logical sample depth after quantization: 2, 4 or 8.
    pub quant_bits: u8,
    /// JPEG quality 1..=100; `None` keeps a lossless container.
    pub jpeg_quality: Option<u8>,
    /// Resize so the longer side equals this value (aspect preserved).
    pub max_side: Option<u32>,
    /// Extra uniform scale in (0, 4], applied after `max_side`.
    pub scale_factor: Option<f64>,
    /// Target color model.
    pub color_model: ColorModel,
    /// Gamma correction, applied before color conversion.
    pub gamma: GammaMode,
    /// Radial distortion coefficient; 0 disables the stage.
    pub distortion_k1: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            quant_bits: 8,
            jpeg_quality: None,
            max_side: None,
            scale_factor: None,
            color_model: ColorModel::Rgb,
            gamma: GammaMode::None,
            distortion_k1: 0.0,
        }
    }
}

impl PipelineConfig {
    /// Folds no-op parameter spellings into their canonical form.
    pub fn normalize(&mut self) {
        if let GammaMode::Fixed(g) = self.gamma {
            if g == 1.0 {
                self.gamma = GammaMode::None;
            }
        }
        if self.scale_factor == Some(1.0) {
            self.scale_factor = None;
        }
    }

    /// Checks every field range.
    pub fn validate(&self) -> Result<()> {
        crate::buffer::level_count(self.quant_bits)?;
        if let Some(q) = self.jpeg_quality {
            if q == 0 || q > 100 {
                return Err(Error::InvalidJpegQuality(q as u16));
            }
        }
        if let Some(side) = self.max_side {
            if side < 8 {
                return Err(Error::ResizeTargetTooSmall(side));
            }
        }
        if let Some(f) = self.scale_factor {
            if !(f > 0.0 && f <= 4.0) {
                return Err(Error::ScaleFactorOutOfRange(f));
            }
        }
        if let GammaMode::Fixed(g) = self.gamma {
            if !(g > 0.0 && g <= 10.0) {
                return Err(Error::InvalidGamma(g));
            }
        }
        if self.distortion_k1.is_nan() || self.distortion_k1.abs() > 0.5 {
            return Err(Error::DistortionOutOfRange(self.distortion_k1));
        }
        Ok(())
    }

    /// Short, filesystem-safe identifier. Injective over normalized configs:
    /// every numeric field prints with its shortest round-trip representation.
    ///
    /// Segments: quantization, compression, resolution, color model, gamma,
    /// distortion. Defaults spell `q8_lossless_full_rgb_g1_k0`.
    pub fn config_id(&self) -> String {
        let quant = format!("q{}", self.quant_bits);
        let comp = match self.jpeg_quality {
            Some(q) => format!("j{q}"),
            None => "lossless".to_owned(),
        };
        let res = match (self.max_side, self.scale_factor) {
            (None, None) => "full".to_owned(),
            (Some(side), None) => format!("s{side}"),
            (None, Some(f)) => format!("x{f}"),
            (Some(side), Some(f)) => format!("s{side}x{f}"),
        };
        let gamma = self.gamma.id_segment();
        let k = format!("k{}", self.distortion_k1);
        format!("{quant}_{comp}_{res}_{}_{gamma}_{k}", self.color_model.tag())
    }

    /// Parses a `key = value` configuration file; see [`parse_kv_lines`] for
    /// the line grammar and [`set_field`] for the recognized keys.
    pub fn from_file(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path).map_err(Error::io_at(path))?;
        PipelineConfig::from_kv_text(&text)
    }

    pub fn from_kv_text(text: &str) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        for (line_no, key, value) in parse_kv_lines(text)? {
            cfg.set_field(&key, &value).map_err(|reason| Error::ConfigParse { line: line_no, reason })?;
        }
        cfg.normalize();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one key/value pair; shared by the single-config and sweep
    /// grammars. Returns a human-readable reason on failure.
    pub fn set_field(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "quant_bits" => self.quant_bits = parse_num(value, "bit depth")?,
            "jpeg_quality" => {
                self.jpeg_quality = match value {
                    "lossless" => None,
                    v => Some(parse_num(v, "jpeg quality")?),
                }
            }
            "max_side" => {
                self.max_side = match value {
                    "full" => None,
                    v => Some(parse_num(v, "max side")?),
                }
            }
            "scale_factor" => self.scale_factor = Some(parse_num(value, "scale factor")?),
            "color_model" => {
                self.color_model = ColorModel::from_tag(value)
                    .ok_or_else(|| format!("unknown color model '{value}'"))?
            }
            "gamma" => {
                self.gamma = match value {
                    "none" => GammaMode::None,
                    "dynamic" => GammaMode::Dynamic,
                    v => GammaMode::Fixed(parse_num(v, "gamma")?),
                }
            }
            "distortion_k1" => self.distortion_k1 = parse_num(value, "distortion coefficient")?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }
}

impl fmt::Display for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.config_id())
    }
}

fn parse_num<T: std::str::FromStr>(value: &str, what: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("invalid {what} '{value}'"))
}

/// Splits a plain-text configuration into `(line_number, key, value)` triples.
///
/// Grammar: one `key = value` pair per line; `#` starts a comment; blank lines
/// are skipped; keys and values are trimmed. Repeated keys are preserved in
/// order (the sweep grammar turns them into lists; single-config parsing lets
/// the last occurrence win).
pub fn parse_kv_lines(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigParse {
            line: i + 1,
            reason: format!("expected 'key = value', got '{line}'"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(Error::ConfigParse { line: i + 1, reason: "empty key or value".into() });
        }
        out.push((i + 1, key.to_owned(), value.to_owned()));
    }
    Ok(out)
}
