//! Planar image buffer shared by every pipeline stage.
//!
//! Samples are stored plane-major: `samples[c * w*h + y * w + x]`. All planes
//! hold `u8` values; buffers quantized below 8 bits keep their samples on the
//! reconstruction level set (multiples of 255/(2^bits - 1)) and record the
//! logical depth in `bit_depth` so codecs can bit-pack them.

use crate::error::{Error, Result};

/// How the channel planes of a buffer are to be interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorModel {
    /// Single luma plane.
    Gray,
    /// R, G, B planes.
    Rgb,
    /// H, S, V planes; hue stored as degrees/2 in 0..=179.
    Hsv,
    /// H, L, S planes; hue stored as degrees/2 in 0..=179.
    Hls,
    /// Y, Cb, Cr planes (BT.601 full range).
    YCbCr,
    /// Blue, green, red, red-edge, near-infrared planes.
    Bgrne,
}

impl ColorModel {
    pub const ALL: [ColorModel; 6] = [
        ColorModel::Gray,
        ColorModel::Rgb,
        ColorModel::Hsv,
        ColorModel::Hls,
        ColorModel::YCbCr,
        ColorModel::Bgrne,
    ];

    /// Number of channel planes the model implies.
    pub fn channels(self) -> u8 {
        match self {
            ColorModel::Gray => 1,
            ColorModel::Rgb | ColorModel::Hsv | ColorModel::Hls | ColorModel::YCbCr => 3,
            ColorModel::Bgrne => 5,
        }
    }

    /// Lower-case tag used in configuration files and identifiers.
    pub fn tag(self) -> &'static str {
        match self {
            ColorModel::Gray => "gray",
            ColorModel::Rgb => "rgb",
            ColorModel::Hsv => "hsv",
            ColorModel::Hls => "hls",
            ColorModel::YCbCr => "ycbcr",
            ColorModel::Bgrne => "bgrne",
        }
    }

    pub fn from_tag(tag: &str) -> Option<ColorModel> {
        ColorModel::ALL.iter().copied().find(|m| m.tag() == tag)
    }
}

/// Number of levels for a logical bit depth.
pub fn level_count(bits: u8) -> Result<u16> {
    match bits {
        2 | 4 | 8 => Ok(1u16 << bits),
        other => Err(Error::UnsupportedBitDepth(other)),
    }
}

/// Reconstruction step between adjacent levels (255 / (2^bits - 1); exact for 2, 4, 8).
pub fn level_step(bits: u8) -> Result<u8> {
    Ok((255 / (level_count(bits)? - 1)) as u8)
}

/// Planar, owned image data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    channels: u8,
    bit_depth: u8,
    color_model: ColorModel,
    samples: Vec<u8>,
}

impl ImageBuffer {
    /// Builds a buffer and checks every structural invariant; see [`validate`].
    pub fn new(
        width: u32,
        height: u32,
        color_model: ColorModel,
        bit_depth: u8,
        samples: Vec<u8>,
    ) -> Result<ImageBuffer> {
        let buf = ImageBuffer {
            width,
            height,
            channels: color_model.channels(),
            bit_depth,
            color_model,
            samples,
        };
        let violations = buf.validate();
        if violations.is_empty() {
            Ok(buf)
        } else {
            Err(Error::InvalidBuffer(violations.join("; ")))
        }
    }

    /// Builds a buffer without validating; only for tests and codecs that
    /// validate separately.
    pub fn from_raw_parts(
        width: u32,
        height: u32,
        channels: u8,
        color_model: ColorModel,
        bit_depth: u8,
        samples: Vec<u8>,
    ) -> ImageBuffer {
        ImageBuffer { width, height, channels, bit_depth, color_model, samples }
    }

    /// Uniform image of a single value.
    pub fn constant(width: u32, height: u32, color_model: ColorModel, value: u8) -> ImageBuffer {
        let n = width as usize * height as usize * color_model.channels() as usize;
        ImageBuffer {
            width,
            height,
            channels: color_model.channels(),
            bit_depth: 8,
            color_model,
            samples: vec![value; n],
        }
    }

    /// Returns every violated invariant (empty means the buffer is valid):
    /// positive dimensions, channel count matching the color model, sample
    /// count `channels * width * height`, supported bit depth, and all samples
    /// on the level set for depths below 8.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.width == 0 || self.height == 0 {
            v.push(format!("dimensions {}x{} must be positive", self.width, self.height));
        }
        if self.channels != self.color_model.channels() {
            v.push(format!(
                "channel count {} does not match color model {} (expects {})",
                self.channels,
                self.color_model.tag(),
                self.color_model.channels()
            ));
        }
        let expected = self.width as usize * self.height as usize * self.channels as usize;
        if self.samples.len() != expected {
            v.push(format!("sample count {} != channels*width*height = {}", self.samples.len(), expected));
        }
        match level_step(self.bit_depth) {
            Err(_) => v.push(format!("unsupported bit depth {}", self.bit_depth)),
            Ok(step) if self.bit_depth < 8 => {
                if let Some((i, &s)) = self.samples.iter().enumerate().find(|(_, &s)| s % step != 0) {
                    v.push(format!(
                        "sample {} at index {} is not on the {}-bit level set",
                        s, i, self.bit_depth
                    ));
                }
            }
            Ok(_) => {}
        }
        v
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    pub fn color_model(&self) -> ColorModel {
        self.color_model
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Borrow one channel plane.
    pub fn plane(&self, c: u8) -> &[u8] {
        let n = self.pixel_count();
        let c = c as usize;
        &self.samples[c * n..(c + 1) * n]
    }

    /// Sample accessor; `x`, `y` in pixels, `c` a plane index.
    pub fn sample(&self, c: u8, x: u32, y: u32) -> u8 {
        self.samples[c as usize * self.pixel_count() + y as usize * self.width as usize + x as usize]
    }

}
