//! Radial lens distortion: single-coefficient forward model
//! `r_d = r_u·(1 + k1·r_u²)` with Newton inversion for synthesis and the
//! closed forward form for correction.
//!
//! Coordinates are normalized by the half-diagonal about the image center, so
//! r = 1 at the corners and k1 is resolution-free. Negative k1 (barrel) folds
//! beyond r* = √(−1/(3k1)); distorted radii past the fold maximum have no
//! preimage and are filled black like any other out-of-bounds sample.

use crate::buffer::ImageBuffer;
use crate::error::{Error, Result};

/// Newton residual tolerance on the normalized radius.
const TOL: f64 = 1e-9;
/// Newton/bisection iteration budget per pixel.
const MAX_ITERS: u32 = 25;

/// Radial model parameters; the center and normalization radius derive from
/// the image, keeping the coefficient dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionParams {
    pub k1: f64,
}

impl DistortionParams {
    pub fn new(k1: f64) -> Result<DistortionParams> {
        if k1.is_nan() || k1.abs() > 0.5 {
            return Err(Error::DistortionOutOfRange(k1));
        }
        Ok(DistortionParams { k1 })
    }
}

/// Distorted radius for an undistorted one.
pub fn forward_radius(k1: f64, r_u: f64) -> f64 {
    r_u * (1.0 + k1 * r_u * r_u)
}

/// Outcome of inverting the forward model at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusInverse {
    Root(f64),
    /// Barrel fold: no undistorted radius maps here.
    NoPreimage,
    /// Iteration budget exhausted before the tolerance was met.
    NotConverged,
}

/// Solves `forward_radius(k1, r) = r_d` for the physical (smallest
/// non-negative) root with a bracketed Newton iteration.
pub fn invert_radius(k1: f64, r_d: f64) -> RadiusInverse {
    if r_d <= 0.0 || k1 == 0.0 {
        return RadiusInverse::Root(r_d.max(0.0));
    }
    // Bracket the root where the model is monotone increasing.
    let (mut lo, mut hi) = if k1 > 0.0 {
        // forward(r) >= r, so the root sits at or below r_d.
        (0.0, r_d)
    } else {
        let fold = (-1.0 / (3.0 * k1)).sqrt();
        if r_d > forward_radius(k1, fold) {
            return RadiusInverse::NoPreimage;
        }
        // forward(r) <= r on the rising branch, so the root is in [r_d, fold].
        (r_d, fold)
    };
    let mut r = r_d.clamp(lo, hi);
    for _ in 0..MAX_ITERS {
        let f = forward_radius(k1, r) - r_d;
        if f.abs() <= TOL {
            return RadiusInverse::Root(r);
        }
        if f > 0.0 {
            hi = r;
        } else {
            lo = r;
        }
        let slope = 1.0 + 3.0 * k1 * r * r;
        let newton = r - f / slope;
        r = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    if (forward_radius(k1, r) - r_d).abs() <= TOL {
        RadiusInverse::Root(r)
    } else {
        RadiusInverse::NotConverged
    }
}

/// A warped image plus per-pixel Newton diagnostics.
#[derive(Debug)]
pub struct Distorted {
    pub image: ImageBuffer,
    /// Pixels whose radius inversion exhausted the iteration budget; expected
    /// to be 0 for every |k1| ≤ 0.5.
    pub newton_failures: u64,
}

/// Synthesizes lens distortion: each output pixel at distorted radius r_d
/// samples the input at its undistorted preimage. Out-of-bounds and foldover
/// preimages are filled black.
pub fn distort(buf: &ImageBuffer, params: DistortionParams) -> Result<Distorted> {
    if params.k1 == 0.0 {
        return Ok(Distorted { image: buf.clone(), newton_failures: 0 });
    }
    let mut failures = 0u64;
    let image = warp(buf, |r| match invert_radius(params.k1, r) {
        RadiusInverse::Root(r_u) => Some(r_u),
        RadiusInverse::NoPreimage => None,
        RadiusInverse::NotConverged => {
            failures += 1;
            None
        }
    });
    Ok(Distorted { image, newton_failures: failures })
}

/// Corrects lens distortion: each output pixel at undistorted radius r_u
/// samples the input at the distorted location given directly by the forward
/// model. Same black fill rule; no iteration involved.
pub fn undistort(buf: &ImageBuffer, params: DistortionParams) -> Result<ImageBuffer> {
    if params.k1 == 0.0 {
        return Ok(buf.clone());
    }
    Ok(warp(buf, |r| Some(forward_radius(params.k1, r))))
}

/// Resamples `buf` through a radial mapping: for each output pixel at
/// normalized radius r, `source_radius(r)` names the normalized radius to
/// sample from (None = fill black). Bilinear sampling; interpolated output is
/// tagged 8-bit.
fn warp(buf: &ImageBuffer, mut source_radius: impl FnMut(f64) -> Option<f64>) -> ImageBuffer {
    let (w, h) = (buf.width() as usize, buf.height() as usize);
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let norm = (w as f64).hypot(h as f64) / 2.0;
    let channels = buf.channels() as usize;

    let mut samples = vec![0u8; w * h * channels];
    for y in 0..h {
        for x in 0..w {
            let dx = (x as f64 + 0.5 - cx) / norm;
            let dy = (y as f64 + 0.5 - cy) / norm;
            let r = dx.hypot(dy);
            let src = match source_radius(r) {
                Some(r_src) => r_src,
                None => continue,
            };
            let scale = if r == 0.0 { 1.0 } else { src / r };
            let sx = cx + dx * scale * norm - 0.5;
            let sy = cy + dy * scale * norm - 0.5;
            if let Some(taps) = bilinear_taps(sx, sy, w, h) {
                for c in 0..channels {
                    let plane = buf.plane(c as u8);
                    let v = taps.iter().map(|&(idx, wt)| plane[idx] as f64 * wt).sum::<f64>();
                    samples[c * w * h + y * w + x] = v.round() as u8;
                }
            }
        }
    }
    ImageBuffer::new(buf.width(), buf.height(), buf.color_model(), 8, samples)
        .expect("warp preserves buffer shape")
}

/// Neighbor indices and weights for a continuous pixel-index position, or
/// None when the position falls outside the image rectangle.
fn bilinear_taps(x: f64, y: f64, w: usize, h: usize) -> Option<[(usize, f64); 4]> {
    if x < -0.5 || y < -0.5 || x > w as f64 - 0.5 || y > h as f64 - 0.5 {
        return None;
    }
    let xc = x.clamp(0.0, (w - 1) as f64);
    let yc = y.clamp(0.0, (h - 1) as f64);
    let x0 = xc.floor() as usize;
    let y0 = yc.floor() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = xc - x0 as f64;
    let fy = yc - y0 as f64;
    Some([
        (y0 * w + x0, (1.0 - fx) * (1.0 - fy)),
        (y0 * w + x1, fx * (1.0 - fy)),
        (y1 * w + x0, (1.0 - fx) * fy),
        (y1 * w + x1, fx * fy),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buffer::ColorModel;
    use proptest::prelude::*;

    #[test]
    fn zero_coefficient_is_bit_exact_identity() {
        let buf = ImageBuffer::new(3, 2, ColorModel::Gray, 8, vec![9, 8, 7, 6, 5, 4]).unwrap();
        let p = DistortionParams::new(0.0).unwrap();
        let out = distort(&buf, p).unwrap();
        assert_eq!(out.image, buf);
        assert_eq!(out.newton_failures, 0);
        assert_eq!(undistort(&buf, p).unwrap(), buf);
    }

    #[test]
    fn coefficient_guard() {
        assert!(DistortionParams::new(0.5).is_ok());
        assert!(matches!(DistortionParams::new(0.51), Err(Error::DistortionOutOfRange(_))));
        assert!(matches!(DistortionParams::new(f64::NAN), Err(Error::DistortionOutOfRange(_))));
    }

    #[test]
    fn unit_radius_maps_to_1_2_under_pincushion() {
        assert!((forward_radius(0.2, 1.0) - 1.2).abs() < 1e-15);
    }

    #[test]
    fn center_pixel_is_a_fixed_point() {
        // Odd dims put a pixel center exactly on the image center (r = 0).
        let mut samples = vec![10u8; 9 * 9];
        samples[4 * 9 + 4] = 200;
        let buf = ImageBuffer::new(9, 9, ColorModel::Gray, 8, samples).unwrap();
        for k1 in [-0.2, 0.2, 0.5, -0.5] {
            let out = distort(&buf, DistortionParams::new(k1).unwrap()).unwrap();
            assert_eq!(out.image.sample(0, 4, 4), 200, "k1={k1}");
            assert_eq!(out.newton_failures, 0, "k1={k1}");
        }
    }

    #[test]
    fn barrel_fold_region_has_no_preimage() {
        // k1 = -0.2 folds at r* = sqrt(1/0.6) ≈ 1.29; max attainable
        // r_d = forward(r*) ≈ 0.861, so corner radii are unreachable.
        let fold_max = forward_radius(-0.2, (1.0f64 / 0.6).sqrt());
        assert!((fold_max - 0.8607).abs() < 1e-3);
        assert_eq!(invert_radius(-0.2, 1.0), RadiusInverse::NoPreimage);
        assert!(matches!(invert_radius(-0.2, fold_max - 1e-6), RadiusInverse::Root(_)));
    }

    proptest! {
        // Forward-then-invert closes the loop across the supported
        // coefficient range, near the fold included.
        #[test]
        fn invert_is_a_right_inverse(k1 in -0.5f64..=0.5, r_u in 0.0f64..=1.3) {
            // Stay on the monotone branch for negative coefficients.
            let r_u = if k1 < 0.0 { r_u.min((-1.0 / (3.0 * k1)).sqrt()) } else { r_u };
            let r_d = forward_radius(k1, r_u);
            match invert_radius(k1, r_d) {
                RadiusInverse::Root(r) => {
                    prop_assert!((forward_radius(k1, r) - r_d).abs() <= 1e-9,
                        "k1={k1} r_u={r_u} recovered={r}");
                }
                other => prop_assert!(false, "k1={k1} r_u={r_u}: {other:?}"),
            }
        }
    }

    #[test]
    fn pincushion_pulls_midpoint_samples_outward() {
        // A bright ring at mid radius moves toward the center under
        // pincushion synthesis (output samples upstream toward smaller r_u).
        let n = 64usize;
        let mut samples = vec![0u8; n * n];
        for y in 0..n {
            for x in 0..n {
                let dx = x as f64 + 0.5 - 32.0;
                let dy = y as f64 + 0.5 - 32.0;
                if dx.hypot(dy) <= 16.0 {
                    samples[y * n + x] = 255;
                }
            }
        }
        let buf = ImageBuffer::new(64, 64, ColorModel::Gray, 8, samples).unwrap();
        let out = distort(&buf, DistortionParams::new(0.2).unwrap()).unwrap().image;
        // Dilation grows the disk's integrated intensity; the interior stays
        // saturated while the rim spreads outward.
        let mass = |b: &ImageBuffer| b.samples().iter().map(|&v| v as u64).sum::<u64>();
        assert!(mass(&out) > mass(&buf) + 255, "disk should dilate under pincushion");
        assert_eq!(out.sample(0, 32, 32), 255, "disk interior should stay saturated");
    }
}

