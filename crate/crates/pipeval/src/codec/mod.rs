//! Storage formats and file I/O: JPEG (lossy), PNG (lossless), QRAW
//! (bit-packed raw), plus multispectral band sets and size accounting.

pub mod jpeg;
pub mod png;
pub mod qraw;
pub mod stats;

pub use jpeg::{decode_jpeg, encode_jpeg};
pub use png::{decode_png, encode_png};
pub use qraw::{decode_qraw, encode_qraw, QRAW_HEADER_LEN, QRAW_MAGIC, QRAW_VERSION};
pub use stats::{compute_size_stats, image_sizes, list_images, SizeEntry, SizeStats};

use std::path::{Path, PathBuf};

use crate::buffer::{ColorModel, ImageBuffer};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::transforms::multispectral::{fuse_multispectral, BAND_SUFFIXES};

/// On-disk container choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum StorageFormat {
    Png,
    Jpeg(u8),
    QRaw,
}

impl StorageFormat {
    pub fn extension(self) -> &'static str {
        match self {
            StorageFormat::Png => "png",
            StorageFormat::Jpeg(_) => "jpg",
            StorageFormat::QRaw => "qraw",
        }
    }

    /// The container a configuration's output lands in: JPEG when a quality
    /// is set, otherwise QRAW when the reduced bit depth or band count needs
    /// it, otherwise PNG.
    pub fn for_config(cfg: &PipelineConfig) -> StorageFormat {
        if let Some(q) = cfg.jpeg_quality {
            StorageFormat::Jpeg(q)
        } else if cfg.quant_bits < 8 || cfg.color_model == ColorModel::Bgrne {
            StorageFormat::QRaw
        } else {
            StorageFormat::Png
        }
    }
}

/// An encoded image with its provenance, as handed between pipeline stages.
#[derive(Debug, Clone)]
pub struct EncodedBlob {
    pub format: StorageFormat,
    pub bytes: Vec<u8>,
    pub width: u32,
    pub height: u32,
    pub channels: u8,
}

/// Encodes a buffer into the given container.
pub fn encode(buf: &ImageBuffer, format: StorageFormat) -> Result<EncodedBlob> {
    let bytes = match format {
        StorageFormat::Png => encode_png(buf)?,
        StorageFormat::Jpeg(q) => encode_jpeg(buf, q)?,
        StorageFormat::QRaw => encode_qraw(buf)?,
    };
    Ok(EncodedBlob {
        format,
        bytes,
        width: buf.width(),
        height: buf.height(),
        channels: buf.channels(),
    })
}

/// Decodes any supported container, dispatching on the stream's magic bytes.
pub fn decode(bytes: &[u8]) -> Result<ImageBuffer> {
    if bytes.starts_with(&QRAW_MAGIC) {
        decode_qraw(bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(bytes)
    } else if bytes.starts_with(&[0xFF, 0xD8]) {
        decode_jpeg(bytes)
    } else {
        Err(Error::Codec("unrecognized image container (not qraw/png/jpeg)".into()))
    }
}

/// Reads and decodes one image file.
pub fn read_image(path: &Path) -> Result<ImageBuffer> {
    let bytes = std::fs::read(path).map_err(Error::io_at(path))?;
    decode(&bytes).map_err(|e| match e {
        Error::Codec(msg) => Error::Codec(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Encodes and writes one image file; returns the byte count written.
pub fn write_image(path: &Path, buf: &ImageBuffer, format: StorageFormat) -> Result<u64> {
    let blob = encode(buf, format)?;
    std::fs::write(path, &blob.bytes).map_err(Error::io_at(path))?;
    Ok(blob.bytes.len() as u64)
}

/// Loads the five band files `<stem>_B/_G/_R/_RE/_NIR.png` from `dir` and
/// fuses them into one BGRNE buffer.
pub fn load_band_set(dir: &Path, stem: &str) -> Result<ImageBuffer> {
    let mut bands = Vec::with_capacity(5);
    for suffix in BAND_SUFFIXES {
        bands.push(read_image(&band_path(dir, stem, suffix))?);
    }
    fuse_multispectral(&bands)
}

/// Writes a BGRNE buffer as five per-band grayscale PNGs; returns total bytes.
pub fn write_band_set(dir: &Path, stem: &str, buf: &ImageBuffer) -> Result<u64> {
    let mut total = 0;
    for (i, suffix) in BAND_SUFFIXES.iter().enumerate() {
        let band = crate::transforms::extract_band(buf, i)?;
        total += write_image(&band_path(dir, stem, suffix), &band, StorageFormat::Png)?;
    }
    Ok(total)
}

pub fn band_path(dir: &Path, stem: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{stem}_{suffix}.png"))
}

/// Stems in `dir` that have a complete five-band file set.
pub fn band_set_stems(dir: &Path) -> Result<Vec<String>> {
    let mut stems = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(Error::io_at(dir))? {
        let path = entry.map_err(Error::io_at(dir))?.path();
        let stem = match path.file_stem().and_then(|s| s.to_str()) {
            Some(s) => s,
            None => continue,
        };
        if let Some(base) = stem.strip_suffix("_B") {
            if BAND_SUFFIXES.iter().all(|s| band_path(dir, base, s).is_file()) {
                stems.push(base.to_owned());
            }
        }
    }
    stems.sort();
    Ok(stems)
}

/// Interleaves a 3-plane buffer into pixel-major RGB order.
pub(crate) fn interleave(buf: &ImageBuffer) -> Vec<u8> {
    let (p0, p1, p2) = (buf.plane(0), buf.plane(1), buf.plane(2));
    let mut data = Vec::with_capacity(3 * buf.pixel_count());
    for i in 0..buf.pixel_count() {
        data.push(p0[i]);
        data.push(p1[i]);
        data.push(p2[i]);
    }
    data
}

/// Converts a decoded `image` crate frame into a planar buffer.
pub(crate) fn planarize(img: image::DynamicImage) -> Result<ImageBuffer> {
    use image::DynamicImage;
    let (w, h) = (img.width(), img.height());
    match img {
        DynamicImage::ImageLuma8(gray) => {
            ImageBuffer::new(w, h, ColorModel::Gray, 8, gray.into_raw())
        }
        other => {
            let rgb = other.into_rgb8();
            let n = (w * h) as usize;
            let mut samples = vec![0u8; 3 * n];
            for (i, px) in rgb.pixels().enumerate() {
                samples[i] = px.0[0];
                samples[n + i] = px.0[1];
                samples[2 * n + i] = px.0[2];
            }
            ImageBuffer::new(w, h, ColorModel::Rgb, 8, samples)
        }
    }
}

/// Peak signal-to-noise ratio in dB between two same-shaped buffers;
/// infinite for identical samples.
pub fn psnr(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels() {
        return Err(Error::Codec(format!(
            "psnr shape mismatch: {}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )));
    }
    let mse: f64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum::<f64>()
        / a.samples().len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0f64 * 255.0 / mse).log10())
}
