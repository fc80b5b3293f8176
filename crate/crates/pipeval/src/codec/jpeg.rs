//! JPEG encoding with pinned settings so byte counts are reproducible:
//! baseline streams, standard Annex-K tables scaled by the libjpeg quality
//! formula, 4:2:0 chroma subsampling for 3-channel input, single-component
//! streams for grayscale.

use jpeg_encoder::{ColorType, Encoder, SamplingFactor};

use crate::buffer::ImageBuffer;
use crate::error::{Error, Result};

/// Encodes 1- or 3-channel buffers. The three planes are stored as an RGB
/// image whatever their model tag (containers carry samples, not semantics);
/// quantized buffers are encoded at their 8-bit level values. 5-channel
/// BGRNE input is rejected: split it into per-band files or drop it to RGB.
pub fn encode_jpeg(buf: &ImageBuffer, quality: u8) -> Result<Vec<u8>> {
    if quality == 0 || quality > 100 {
        return Err(Error::InvalidJpegQuality(quality as u16));
    }
    if !matches!(buf.channels(), 1 | 3) {
        return Err(Error::JpegChannels(buf.channels()));
    }
    if buf.width() > u16::MAX as u32 || buf.height() > u16::MAX as u32 {
        return Err(Error::Codec(format!(
            "jpeg dimensions {}x{} exceed the format's 65535 limit",
            buf.width(),
            buf.height()
        )));
    }
    let mut out = Vec::new();
    let mut encoder = Encoder::new(&mut out, quality);
    encoder.set_sampling_factor(SamplingFactor::F_2_2);
    let (w, h) = (buf.width() as u16, buf.height() as u16);
    let result = match buf.channels() {
        1 => encoder.encode(buf.plane(0), w, h, ColorType::Luma),
        _ => encoder.encode(&super::interleave(buf), w, h, ColorType::Rgb),
    };
    result.map_err(|e| Error::Codec(format!("jpeg encode: {e}")))?;
    Ok(out)
}

/// Decodes a JPEG stream to an 8-bit planar buffer (Gray or Rgb).
pub fn decode_jpeg(bytes: &[u8]) -> Result<ImageBuffer> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Jpeg)
        .map_err(|e| Error::Codec(format!("jpeg decode: {e}")))?;
    super::planarize(img)
}
