//! QRAW: bit-packed planar raw container realizing the quantization size law
//! (half the bytes at 4 bits, a quarter at 2 bits).
//!
//! Layout, little-endian header, 15 bytes total:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "QRAW"
//! 4       1     version (1)
//! 5       4     width  (u32 LE)
//! 9       4     height (u32 LE)
//! 13      1     channels (1, 3 or 5)
//! 14      1     bits per sample (2, 4 or 8)
//! 15      ...   payload: per plane, per row, level indices packed MSB-first,
//!               each row padded to a byte boundary
//! ```
//!
//! Payload length is exactly `channels × height × ⌈width·bits/8⌉`.

use crate::buffer::{level_step, ColorModel, ImageBuffer};
use crate::error::{Error, Result};

pub const QRAW_MAGIC: [u8; 4] = *b"QRAW";
pub const QRAW_VERSION: u8 = 1;
pub const QRAW_HEADER_LEN: usize = 15;

/// Bytes one packed row occupies.
pub fn row_stride(width: u32, bits: u8) -> usize {
    (width as usize * bits as usize).div_ceil(8)
}

/// Total encoded size for given dimensions.
pub fn encoded_len(width: u32, height: u32, channels: u8, bits: u8) -> usize {
    QRAW_HEADER_LEN + channels as usize * height as usize * row_stride(width, bits)
}

/// Packs a buffer. Samples must sit on the level set for the buffer's
/// declared depth (they are stored as level indices, not raw values).
pub fn encode_qraw(buf: &ImageBuffer) -> Result<Vec<u8>> {
    let violations = buf.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidBuffer(violations.join("; ")));
    }
    let bits = buf.bit_depth();
    let step = level_step(bits)?;
    let (w, h, c) = (buf.width(), buf.height(), buf.channels());
    let mut out = Vec::with_capacity(encoded_len(w, h, c, bits));
    out.extend_from_slice(&QRAW_MAGIC);
    out.push(QRAW_VERSION);
    out.extend_from_slice(&w.to_le_bytes());
    out.extend_from_slice(&h.to_le_bytes());
    out.push(c);
    out.push(bits);

    let stride = row_stride(w, bits);
    for plane_idx in 0..c {
        let plane = buf.plane(plane_idx);
        for row in plane.chunks_exact(w as usize) {
            let start = out.len();
            out.resize(start + stride, 0);
            let packed = &mut out[start..];
            for (i, &v) in row.iter().enumerate() {
                let index = v / step;
                let bit_pos = i * bits as usize;
                let byte = bit_pos / 8;
                let shift = 8 - bits as usize - (bit_pos % 8);
                packed[byte] |= index << shift;
            }
        }
    }
    Ok(out)
}

fn corrupt(offset: usize, reason: impl Into<String>) -> Error {
    Error::CorruptStream { format: "qraw", offset, reason: reason.into() }
}

/// Unpacks a QRAW stream; the inverse of [`encode_qraw`], bit-exact.
pub fn decode_qraw(bytes: &[u8]) -> Result<ImageBuffer> {
    if bytes.len() < QRAW_HEADER_LEN {
        return Err(corrupt(bytes.len(), "truncated header"));
    }
    if bytes[0..4] != QRAW_MAGIC {
        return Err(corrupt(0, "bad magic"));
    }
    if bytes[4] != QRAW_VERSION {
        return Err(corrupt(4, format!("unsupported version {}", bytes[4])));
    }
    let w = u32::from_le_bytes(bytes[5..9].try_into().unwrap());
    let h = u32::from_le_bytes(bytes[9..13].try_into().unwrap());
    let channels = bytes[13];
    let bits = bytes[14];
    if w == 0 || h == 0 {
        return Err(corrupt(5, format!("zero dimension {w}x{h}")));
    }
    let model = match channels {
        1 => ColorModel::Gray,
        3 => ColorModel::Rgb,
        5 => ColorModel::Bgrne,
        other => return Err(corrupt(13, format!("unsupported channel count {other}"))),
    };
    let step = match bits {
        2 | 4 | 8 => level_step(bits)?,
        other => return Err(corrupt(14, format!("unsupported bit depth {other}"))),
    };
    let expected = encoded_len(w, h, channels, bits);
    if bytes.len() != expected {
        return Err(corrupt(
            bytes.len().min(expected),
            format!("payload length {} != expected {}", bytes.len() - QRAW_HEADER_LEN, expected - QRAW_HEADER_LEN),
        ));
    }

    let stride = row_stride(w, bits);
    let mask = if bits == 8 { 0xFF } else { (1u8 << bits) - 1 };
    let mut samples = Vec::with_capacity(w as usize * h as usize * channels as usize);
    let payload = &bytes[QRAW_HEADER_LEN..];
    for row in payload.chunks_exact(stride) {
        for i in 0..w as usize {
            let bit_pos = i * bits as usize;
            let shift = 8 - bits as usize - (bit_pos % 8);
            let index = (row[bit_pos / 8] >> shift) & mask;
            samples.push(index * step);
        }
    }
    ImageBuffer::new(w, h, model, bits, samples)
}
