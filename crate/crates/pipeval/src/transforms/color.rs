//! Color-model conversions between RGB and the studied alternatives.
//!
//! All conversions run on 8-bit samples. Hue is stored as degrees/2 rounded
//! into 0..=179 so it fits the shared 8-bit container; saturation, value and
//! lightness scale to 0..=255. YCbCr uses BT.601 full-range coefficients.
//! Conversions are defined from RGB outward and back; lateral pairs such as
//! HSV→HLS are rejected.

use crate::buffer::{ColorModel, ImageBuffer};
use crate::error::{Error, Result};
use crate::transforms::gamma::LUMA_WEIGHTS;

/// Converts `buf` to `target`. Supported directions: RGB to any model,
/// any model back to RGB (GRAY replicates its plane, BGRNE drops to its
/// R, G, B planes), and the identity.
pub fn convert_color(buf: &ImageBuffer, target: ColorModel) -> Result<ImageBuffer> {
    if buf.bit_depth() != 8 {
        return Err(Error::ExpectedEightBit(buf.bit_depth()));
    }
    let source = buf.color_model();
    if source == target {
        return Ok(buf.clone());
    }
    match (source, target) {
        (ColorModel::Rgb, ColorModel::Hsv) => Ok(map_triplet(buf, target, rgb_to_hsv)),
        (ColorModel::Rgb, ColorModel::Hls) => Ok(map_triplet(buf, target, rgb_to_hls)),
        (ColorModel::Rgb, ColorModel::YCbCr) => Ok(map_triplet(buf, target, rgb_to_ycbcr)),
        (ColorModel::Rgb, ColorModel::Gray) => Ok(rgb_to_gray(buf)),
        (ColorModel::Hsv, ColorModel::Rgb) => Ok(map_triplet(buf, target, hsv_to_rgb)),
        (ColorModel::Hls, ColorModel::Rgb) => Ok(map_triplet(buf, target, hls_to_rgb)),
        (ColorModel::YCbCr, ColorModel::Rgb) => Ok(map_triplet(buf, target, ycbcr_to_rgb)),
        (ColorModel::Gray, ColorModel::Rgb) => Ok(gray_to_rgb(buf)),
        (ColorModel::Bgrne, ColorModel::Rgb) => Ok(bgrne_to_rgb(buf)),
        (from, to) => Err(Error::UnsupportedColorConversion { from: from.tag(), to: to.tag() }),
    }
}

fn map_triplet(
    buf: &ImageBuffer,
    target: ColorModel,
    f: impl Fn(u8, u8, u8) -> (u8, u8, u8),
) -> ImageBuffer {
    let n = buf.pixel_count();
    let (p0, p1, p2) = (buf.plane(0), buf.plane(1), buf.plane(2));
    let mut samples = vec![0u8; 3 * n];
    let (o0, rest) = samples.split_at_mut(n);
    let (o1, o2) = rest.split_at_mut(n);
    for i in 0..n {
        let (a, b, c) = f(p0[i], p1[i], p2[i]);
        o0[i] = a;
        o1[i] = b;
        o2[i] = c;
    }
    ImageBuffer::new(buf.width(), buf.height(), target, 8, samples)
        .expect("triplet map preserves buffer shape")
}

fn rgb_to_gray(buf: &ImageBuffer) -> ImageBuffer {
    let (r, g, b) = (buf.plane(0), buf.plane(1), buf.plane(2));
    let samples: Vec<u8> = (0..buf.pixel_count())
        .map(|i| {
            (LUMA_WEIGHTS[0] * r[i] as f64 + LUMA_WEIGHTS[1] * g[i] as f64 + LUMA_WEIGHTS[2] * b[i] as f64)
                .round() as u8
        })
        .collect();
    ImageBuffer::new(buf.width(), buf.height(), ColorModel::Gray, 8, samples)
        .expect("gray plane matches source dims")
}

fn gray_to_rgb(buf: &ImageBuffer) -> ImageBuffer {
    let mut samples = Vec::with_capacity(3 * buf.pixel_count());
    for _ in 0..3 {
        samples.extend_from_slice(buf.plane(0));
    }
    ImageBuffer::new(buf.width(), buf.height(), ColorModel::Rgb, 8, samples)
        .expect("replicated planes match source dims")
}

fn bgrne_to_rgb(buf: &ImageBuffer) -> ImageBuffer {
    let mut samples = Vec::with_capacity(3 * buf.pixel_count());
    for plane in [2u8, 1, 0] {
        samples.extend_from_slice(buf.plane(plane));
    }
    ImageBuffer::new(buf.width(), buf.height(), ColorModel::Rgb, 8, samples)
        .expect("extracted planes match source dims")
}

/// Hue in degrees of an RGB pixel, or 0 for achromatic pixels.
fn hue_degrees(r: f64, g: f64, b: f64, max: f64, min: f64) -> f64 {
    if max == min {
        return 0.0;
    }
    let d = max - min;
    let h = if max == r {
        60.0 * (g - b) / d
    } else if max == g {
        120.0 + 60.0 * (b - r) / d
    } else {
        240.0 + 60.0 * (r - g) / d
    };
    if h < 0.0 {
        h + 360.0
    } else {
        h
    }
}

/// Degrees/2 rounded into 0..=179 (360° wraps to 0).
fn encode_hue(h: f64) -> u8 {
    let half = (h / 2.0).round() as i32;
    (half % 180) as u8
}

fn rgb_to_hsv(r: u8, g: u8, b: u8) -> (u8, u8, u8) {
    let (rf, gf, bf) = (r as f64, g as f64, b as f64);
    let max = rf.max(gf).max(bf);
    let min = rf.min(gf).min(bf);
    let s = if max == 0.0 { 0.0 } else { 255.0 * (max - min) / max };
    (encode_hue(hue_degrees(rf, gf, bf, max, min)), s.round() as u8, max as u8)
}

fn hsv_to_rgb(h: u8, s: u8, v: u8) -> (u8, u8, u8) {
    let h = h as f64 * 2.0;
    let s = s as f64 / 255.0;
    let v = v as f64 / 255.0;
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r1, g1, b1) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    (scale_unit(r1 + m), scale_unit(g1 + m), scale_unit(b1 + m))
}

fn rgb_to_hls(r: u8, g: u8, b: u8) -> (u8, u8, u8) {
    let (rf, gf, bf) = (r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0);
    let max = rf.max(gf).max(bf);
    let min = rf.min(gf).min(bf);
    let l = (max + min) / 2.0;
    let s = if max == min {
        0.0
    } else if l < 0.5 {
        (max - min) / (max + min)
    } else {
        (max - min) / (2.0 - max - min)
    };
    let h = hue_degrees(rf, gf, bf, max, min);
    (encode_hue(h), scale_unit(l), scale_unit(s))
}

fn hls_to_rgb(h: u8, l: u8, s: u8) -> (u8, u8, u8) {
    let h = h as f64 * 2.0 / 360.0;
    let l = l as f64 / 255.0;
    let s = s as f64 / 255.0;
    if s == 0.0 {
        let v = scale_unit(l);
        return (v, v, v);
    }
    let q = if l < 0.5 { l * (1.0 + s) } else { l + s - l * s };
    let p = 2.0 * l - q;
    (
        scale_unit(hue_to_channel(p, q, h + 1.0 / 3.0)),
        scale_unit(hue_to_channel(p, q, h)),
        scale_unit(hue_to_channel(p, q, h - 1.0 / 3.0)),
    )
}

fn hue_to_channel(p: f64, q: f64, t: f64) -> f64 {
    let t = if t < 0.0 {
        t + 1.0
    } else if t > 1.0 {
        t - 1.0
    } else {
        t
    };
    if t < 1.0 / 6.0 {
        p + (q - p) * 6.0 * t
    } else if t < 0.5 {
        q
    } else if t < 2.0 / 3.0 {
        p + (q - p) * (2.0 / 3.0 - t) * 6.0
    } else {
        p
    }
}

fn rgb_to_ycbcr(r: u8, g: u8, b: u8) -> (u8, u8, u8) {
    let (rf, gf, bf) = (r as f64, g as f64, b as f64);
    let y = 0.299 * rf + 0.587 * gf + 0.114 * bf;
    let cb = 128.0 - 0.168736 * rf - 0.331264 * gf + 0.5 * bf;
    let cr = 128.0 + 0.5 * rf - 0.418688 * gf - 0.081312 * bf;
    (clamp_255(y), clamp_255(cb), clamp_255(cr))
}

fn ycbcr_to_rgb(y: u8, cb: u8, cr: u8) -> (u8, u8, u8) {
    let (yf, cbf, crf) = (y as f64, cb as f64 - 128.0, cr as f64 - 128.0);
    let r = yf + 1.402 * crf;
    let g = yf - 0.344136 * cbf - 0.714136 * crf;
    let b = yf + 1.772 * cbf;
    (clamp_255(r), clamp_255(g), clamp_255(b))
}

fn scale_unit(v: f64) -> u8 {
    clamp_255(v * 255.0)
}

fn clamp_255(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pixel(model: ColorModel, p: [u8; 3]) -> ImageBuffer {
        ImageBuffer::new(1, 1, model, 8, p.to_vec()).unwrap()
    }

    fn convert_pixel(p: [u8; 3], from: ColorModel, to: ColorModel) -> [u8; 3] {
        let out = convert_color(&pixel(from, p), to).unwrap();
        [out.samples()[0], out.samples()[1], out.samples()[2]]
    }

    #[test]
    fn canonical_hsv_values() {
        assert_eq!(convert_pixel([255, 0, 0], ColorModel::Rgb, ColorModel::Hsv), [0, 255, 255]);
        // 240 degrees / 2 under the half-degree hue encoding
        assert_eq!(convert_pixel([0, 0, 255], ColorModel::Rgb, ColorModel::Hsv), [120, 255, 255]);
        assert_eq!(convert_pixel([0, 255, 0], ColorModel::Rgb, ColorModel::Hsv), [60, 255, 255]);
    }

    #[test]
    fn achromatic_ycbcr_sits_on_the_gray_axis() {
        for g in [0u8, 17, 128, 255] {
            assert_eq!(convert_pixel([g, g, g], ColorModel::Rgb, ColorModel::YCbCr), [g, 128, 128]);
        }
    }

    #[test]
    fn gray_of_achromatic_equals_red_plane() {
        for g in [0u8, 5, 100, 255] {
            let out = convert_color(&pixel(ColorModel::Rgb, [g, g, g]), ColorModel::Gray).unwrap();
            assert_eq!(out.channels(), 1);
            assert!((out.samples()[0] as i32 - g as i32).abs() <= 1);
        }
    }

    #[test]
    fn unsupported_pairs_are_rejected() {
        let hsv = pixel(ColorModel::Hsv, [10, 20, 30]);
        assert!(matches!(
            convert_color(&hsv, ColorModel::Hls),
            Err(Error::UnsupportedColorConversion { from: "hsv", to: "hls" })
        ));
        let gray = ImageBuffer::constant(1, 1, ColorModel::Gray, 9);
        assert!(convert_color(&gray, ColorModel::Hsv).is_err());
    }

    #[test]
    fn identity_conversion_is_bit_exact() {
        let buf = pixel(ColorModel::Rgb, [1, 2, 3]);
        assert_eq!(convert_color(&buf, ColorModel::Rgb).unwrap(), buf);
    }

    #[test]
    fn gray_expands_to_replicated_rgb() {
        let gray = ImageBuffer::constant(2, 1, ColorModel::Gray, 42);
        let rgb = convert_color(&gray, ColorModel::Rgb).unwrap();
        assert_eq!(rgb.samples(), &[42, 42, 42, 42, 42, 42]);
    }

    #[test]
    fn bgrne_drops_to_rgb_planes() {
        let mut samples = Vec::new();
        for v in [10u8, 20, 30, 40, 50] {
            samples.extend_from_slice(&[v, v]);
        }
        let bgrne = ImageBuffer::new(2, 1, ColorModel::Bgrne, 8, samples).unwrap();
        let rgb = convert_color(&bgrne, ColorModel::Rgb).unwrap();
        assert_eq!(rgb.samples(), &[30, 30, 20, 20, 10, 10]);
    }

    /// Exhaustive 17-level-per-channel lattice round trips. The hue container
    /// quantizes to 2 degrees, which bounds HSV/HLS reconstruction error at
    /// 4-5 per channel at full saturation; YCbCr has no such bottleneck.
    fn lattice_max_err(model: ColorModel) -> i32 {
        let mut worst = 0;
        for r in (0..=255u16).step_by(17) {
            for g in (0..=255u16).step_by(17) {
                for b in (0..=255u16).step_by(17) {
                    let rgb = [r as u8, g as u8, b as u8];
                    let enc = convert_pixel(rgb, ColorModel::Rgb, model);
                    let dec = convert_pixel(enc, model, ColorModel::Rgb);
                    for c in 0..3 {
                        worst = worst.max((dec[c] as i32 - rgb[c] as i32).abs());
                    }
                }
            }
        }
        worst
    }

    #[test]
    fn ycbcr_lattice_round_trip_within_2() {
        assert!(lattice_max_err(ColorModel::YCbCr) <= 2);
    }

    #[test]
    fn hsv_lattice_round_trip_within_hue_quantization_bound() {
        let err = lattice_max_err(ColorModel::Hsv);
        assert!(err <= 4, "HSV lattice error {err}");
    }

    #[test]
    fn hls_lattice_round_trip_within_hue_quantization_bound() {
        let err = lattice_max_err(ColorModel::Hls);
        assert!(err <= 5, "HLS lattice error {err}");
    }

    #[test]
    fn hue_wraps_at_360_degrees() {
        // Red-adjacent pixel with hue just below 360 degrees must encode near
        // 0/179, never 180.
        let enc = convert_pixel([255, 0, 1], ColorModel::Rgb, ColorModel::Hsv);
        assert!(enc[0] == 0 || enc[0] == 179, "hue {}", enc[0]);
        assert_eq!(encode_hue(359.9), 0);
        assert_eq!(encode_hue(359.0), 0); // rounds to 360/2 = 180, wraps to 0
        assert_eq!(encode_hue(358.0), 179);
    }
}
