//! Early fusion of multispectral band sets into 5-channel BGRNE buffers.

use crate::buffer::{ColorModel, ImageBuffer};
use crate::error::{Error, Result};

/// Band order and the file-name suffixes that carry it.
pub const BAND_SUFFIXES: [&str; 5] = ["B", "G", "R", "RE", "NIR"];

/// Nominal band centers in nanometers, in BGRNE order.
pub const BAND_WAVELENGTHS_NM: [u32; 5] = [475, 560, 668, 717, 842];

/// Stacks five aligned single-channel bands (given in B, G, R, RE, NIR
/// order) into one 5-plane buffer. No resampling: alignment is assumed
/// upstream.
pub fn fuse_multispectral(bands: &[ImageBuffer]) -> Result<ImageBuffer> {
    if bands.len() != 5 {
        return Err(Error::BandCount(bands.len()));
    }
    let (w, h) = (bands[0].width(), bands[0].height());
    let mut samples = Vec::with_capacity(5 * w as usize * h as usize);
    for (i, band) in bands.iter().enumerate() {
        if band.channels() != 1 || band.bit_depth() != 8 {
            return Err(Error::BandFormat(i));
        }
        if band.width() != w || band.height() != h {
            return Err(Error::BandDimsMismatch {
                index: i,
                got_w: band.width(),
                got_h: band.height(),
                want_w: w,
                want_h: h,
            });
        }
        samples.extend_from_slice(band.plane(0));
    }
    ImageBuffer::new(w, h, ColorModel::Bgrne, 8, samples)
}

/// Copies one plane of a BGRNE buffer back out as a grayscale image.
pub fn extract_band(buf: &ImageBuffer, index: usize) -> Result<ImageBuffer> {
    if buf.color_model() != ColorModel::Bgrne || index >= 5 {
        return Err(Error::BandCount(index));
    }
    ImageBuffer::new(buf.width(), buf.height(), ColorModel::Gray, 8, buf.plane(index as u8).to_vec())
}
