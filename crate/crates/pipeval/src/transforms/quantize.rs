//! Bit-depth quantization.

use crate::buffer::{level_count, level_step, ImageBuffer};
use crate::error::{Error, Result};

/// Reduces an 8-bit buffer to `bits` logical levels.
///
/// Per sample `v`: `bin = min(⌊v·2^bits/256⌋, 2^bits−1)`, then
/// `v' = bin·255/(2^bits−1)` (the division is exact for 2, 4 and 8 bits).
/// Samples stay in 8-bit containers on the reconstruction level set; the
/// output records the logical depth so the raw codec can bit-pack it.
pub fn quantize(buf: &ImageBuffer, bits: u8) -> Result<ImageBuffer> {
    level_count(bits)?;
    if buf.bit_depth() != 8 {
        return Err(Error::ExpectedEightBit(buf.bit_depth()));
    }
    if bits == 8 {
        return Ok(buf.clone());
    }
    let step = level_step(bits)?;
    let shift = 8 - bits;
    let samples = buf.samples().iter().map(|&v| (v >> shift) * step).collect();
    ImageBuffer::new(buf.width(), buf.height(), buf.color_model(), bits, samples)
}
