//! PNG encoding/decoding for 1- and 3-channel buffers (the lossless path).

use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder};

use crate::buffer::ImageBuffer;
use crate::error::{Error, Result};

/// Encodes to PNG. Like JPEG, three planes travel as RGB regardless of model
/// tag; quantized buffers are stored at their 8-bit level values (QRAW is the
/// container that exploits the reduced depth).
pub fn encode_png(buf: &ImageBuffer) -> Result<Vec<u8>> {
    let (data, color) = match buf.channels() {
        1 => (buf.plane(0).to_vec(), ExtendedColorType::L8),
        3 => (super::interleave(buf), ExtendedColorType::Rgb8),
        c => return Err(Error::PngChannels(c)),
    };
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(&data, buf.width(), buf.height(), color)
        .map_err(|e| Error::Codec(format!("png encode: {e}")))?;
    Ok(out)
}

/// Decodes a PNG stream to an 8-bit planar buffer (Gray or Rgb).
pub fn decode_png(bytes: &[u8]) -> Result<ImageBuffer> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::Codec(format!("png decode: {e}")))?;
    super::planarize(img)
}
