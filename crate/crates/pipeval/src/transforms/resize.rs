//! Bilinear resizing: max-side limiting and uniform scale factors.

use crate::buffer::ImageBuffer;
use crate::error::{Error, Result};

/// Scales so the longer side equals `side` (aspect preserved within
/// rounding); identity when it already does.
pub fn resize_max_side(buf: &ImageBuffer, side: u32) -> Result<ImageBuffer> {
    if side < 8 {
        return Err(Error::ResizeTargetTooSmall(side));
    }
    let (w, h) = (buf.width(), buf.height());
    let longer = w.max(h);
    if longer == side {
        return Ok(buf.clone());
    }
    let s = side as f64 / longer as f64;
    let (nw, nh) = if w >= h {
        (side, ((h as f64 * s).round() as u32).max(1))
    } else {
        (((w as f64 * s).round() as u32).max(1), side)
    };
    resize_to(buf, nw, nh)
}

/// Scales both dimensions by `f` in (0, 4]; `f = 1` is the identity.
pub fn scale_by_factor(buf: &ImageBuffer, f: f64) -> Result<ImageBuffer> {
    if !(f > 0.0 && f <= 4.0) {
        return Err(Error::ScaleFactorOutOfRange(f));
    }
    if f == 1.0 {
        return Ok(buf.clone());
    }
    let nw = ((buf.width() as f64 * f).round() as u32).max(1);
    let nh = ((buf.height() as f64 * f).round() as u32).max(1);
    resize_to(buf, nw, nh)
}

/// Bilinear resample to exact target dimensions. Interpolation leaves the
/// quantized level set, so non-identity output is always tagged 8-bit.
pub fn resize_to(buf: &ImageBuffer, new_w: u32, new_h: u32) -> Result<ImageBuffer> {
    if new_w == buf.width() && new_h == buf.height() {
        return Ok(buf.clone());
    }
    let (sw, sh) = (buf.width() as usize, buf.height() as usize);
    let (dw, dh) = (new_w as usize, new_h as usize);
    let x_ratio = sw as f64 / dw as f64;
    let y_ratio = sh as f64 / dh as f64;

    // Precompute per-axis neighbor indices and weights once.
    let x_taps: Vec<(usize, usize, f64)> = (0..dw).map(|x| axis_tap(x, x_ratio, sw)).collect();
    let y_taps: Vec<(usize, usize, f64)> = (0..dh).map(|y| axis_tap(y, y_ratio, sh)).collect();

    let mut samples = Vec::with_capacity(dw * dh * buf.channels() as usize);
    for c in 0..buf.channels() {
        let plane = buf.plane(c);
        for &(y0, y1, fy) in &y_taps {
            let row0 = &plane[y0 * sw..y0 * sw + sw];
            let row1 = &plane[y1 * sw..y1 * sw + sw];
            for &(x0, x1, fx) in &x_taps {
                let top = row0[x0] as f64 * (1.0 - fx) + row0[x1] as f64 * fx;
                let bottom = row1[x0] as f64 * (1.0 - fx) + row1[x1] as f64 * fx;
                samples.push((top * (1.0 - fy) + bottom * fy).round() as u8);
            }
        }
    }
    ImageBuffer::new(new_w, new_h, buf.color_model(), 8, samples)
}

/// Source neighbors and fractional weight for one destination index, using
/// pixel-center alignment clamped at the borders.
fn axis_tap(dst: usize, ratio: f64, src_len: usize) -> (usize, usize, f64) {
    let pos = (dst as f64 + 0.5) * ratio - 0.5;
    let clamped = pos.clamp(0.0, (src_len - 1) as f64);
    let i0 = clamped.floor() as usize;
    let i1 = (i0 + 1).min(src_len - 1);
    (i0, i1, clamped - i0 as f64)
}
