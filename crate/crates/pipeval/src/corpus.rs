//! Deterministic synthetic mini-corpus.
//!
//! Twenty aerial-style frames (textured ground, optional road, small bright
//! vehicles and markers) plus five photographic-style scenes, with COCO-style
//! annotations and per-band files for the first two frames. Object contrast
//! comes in two tiers chosen against the quantizer's level sets: high-tier
//! objects stay separable down to 2-bit depth while mid-tier objects flatten
//! into the ground at 2 bits, so detection quality degrades with depth the
//! way the storage study describes.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::annotations::{Annotation, AnnotationSet, BoundingBox, Category, ImageInfo};
use crate::buffer::{ColorModel, ImageBuffer};
use crate::codec::{self, StorageFormat};
use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 42;
pub const VEHICLE_CATEGORY: i64 = 1;
pub const MARKER_CATEGORY: i64 = 2;
pub const AERIAL_COUNT: usize = 20;
pub const SCENE_COUNT: usize = 5;

/// Frames carrying the five per-band files under `bands/`.
pub const BAND_FRAMES: usize = 2;
pub use crate::transforms::multispectral::BAND_SUFFIXES;

// All widths divisible by 4 so sub-byte row packing has no slack bits.
const AERIAL_DIMS: [(u32, u32); 4] = [(384, 256), (320, 240), (448, 288), (352, 224)];
const SCENE_DIMS: [(u32, u32); 5] = [(384, 256), (320, 256), (400, 240), (360, 240), (384, 240)];

const PLACEMENT_MARGIN: u32 = 10;
const PLACEMENT_GAP: u32 = 8;

fn mix_seed(seed: u64, stream: u64) -> u64 {
    seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Lattice value noise in [0, 1]: random corner values, smoothstep-bilinear
/// interpolation between them.
struct ValueNoise {
    cell: f64,
    grid_w: usize,
    grid: Vec<f64>,
}

impl ValueNoise {
    fn new(rng: &mut ChaCha8Rng, width: u32, height: u32, cell: u32) -> ValueNoise {
        let grid_w = (width / cell + 2) as usize;
        let grid_h = (height / cell + 2) as usize;
        let grid = (0..grid_w * grid_h).map(|_| rng.gen::<f64>()).collect();
        ValueNoise { cell: cell as f64, grid_w, grid }
    }

    fn at(&self, x: u32, y: u32) -> f64 {
        let fx = x as f64 / self.cell;
        let fy = y as f64 / self.cell;
        let ix = fx.floor() as usize;
        let iy = fy.floor() as usize;
        let tx = smoothstep(fx - ix as f64);
        let ty = smoothstep(fy - iy as f64);
        let g = |cx: usize, cy: usize| self.grid[cy * self.grid_w + cx];
        let top = g(ix, iy) * (1.0 - tx) + g(ix + 1, iy) * tx;
        let bottom = g(ix, iy + 1) * (1.0 - tx) + g(ix + 1, iy + 1) * tx;
        top * (1.0 - ty) + bottom * ty
    }
}

/// RGB canvas with headroom for signed arithmetic; grain and clamping happen
/// once at the end.
struct Canvas {
    width: u32,
    height: u32,
    planes: [Vec<i16>; 3],
}

impl Canvas {
    fn new(width: u32, height: u32) -> Canvas {
        let n = (width * height) as usize;
        Canvas { width, height, planes: [vec![0; n], vec![0; n], vec![0; n]] }
    }

    fn set(&mut self, x: u32, y: u32, rgb: (i16, i16, i16)) {
        let i = (y * self.width + x) as usize;
        self.planes[0][i] = rgb.0;
        self.planes[1][i] = rgb.1;
        self.planes[2][i] = rgb.2;
    }

    fn fill_rect(&mut self, x: u32, y: u32, w: u32, h: u32, rgb: (i16, i16, i16)) {
        for yy in y..y + h {
            for xx in x..x + w {
                self.set(xx, yy, rgb);
            }
        }
    }

    fn fill_disk(&mut self, cx: u32, cy: u32, r: u32, rgb: (i16, i16, i16)) {
        let r2 = (r * r) as i64;
        for dy in -(r as i64)..=r as i64 {
            for dx in -(r as i64)..=r as i64 {
                if dx * dx + dy * dy <= r2 {
                    self.set((cx as i64 + dx) as u32, (cy as i64 + dy) as u32, rgb);
                }
            }
        }
    }

    /// Adds per-sample grain of the given amplitude, clamps, and packs the
    /// planes into an 8-bit RGB buffer.
    fn finish(self, rng: &mut ChaCha8Rng, grain: i16) -> ImageBuffer {
        let n = (self.width * self.height) as usize;
        let mut samples = Vec::with_capacity(3 * n);
        for plane in &self.planes {
            for &v in plane {
                let noisy = if grain > 0 { v + rng.gen_range(-grain..=grain) } else { v };
                samples.push(noisy.clamp(0, 255) as u8);
            }
        }
        ImageBuffer::new(self.width, self.height, ColorModel::Rgb, 8, samples)
            .expect("generated canvas is structurally valid")
    }
}

/// Axis-aligned placement with a minimum gap to every prior box, so bright
/// objects never merge into one connected component.
fn place(
    rng: &mut ChaCha8Rng,
    taken: &[(u32, u32, u32, u32)],
    width: u32,
    height: u32,
    bw: u32,
    bh: u32,
) -> Option<(u32, u32)> {
    for _ in 0..200 {
        let x = rng.gen_range(PLACEMENT_MARGIN..width - PLACEMENT_MARGIN - bw);
        let y = rng.gen_range(PLACEMENT_MARGIN..height - PLACEMENT_MARGIN - bh);
        let clear = taken.iter().all(|&(tx, ty, tw, th)| {
            x >= tx + tw + PLACEMENT_GAP
                || tx >= x + bw + PLACEMENT_GAP
                || y >= ty + th + PLACEMENT_GAP
                || ty >= y + bh + PLACEMENT_GAP
        });
        if clear {
            return Some((x, y));
        }
    }
    None
}

/// High tier sits above the top 2-bit level boundary (≥ 187 after grain);
/// mid tier stays inside the same 2-bit bin as the ground (≤ 167 after
/// grain) yet far enough above it to survive 4-bit binning.
fn vehicle_color(rng: &mut ChaCha8Rng, high: bool) -> (i16, i16, i16) {
    if high {
        let base = rng.gen_range(196..=214);
        (base + 4, base, base - 6)
    } else {
        let base = rng.gen_range(148..=160);
        (base + 3, base, base - 4)
    }
}

fn marker_color(rng: &mut ChaCha8Rng, high: bool) -> (i16, i16, i16) {
    if high {
        let base = rng.gen_range(198..=212);
        (base - 2, base + 2, base)
    } else {
        let base = rng.gen_range(150..=162);
        (base - 2, base + 2, base - 1)
    }
}

/// One aerial frame plus its ground-truth boxes. Ground and mid-tier values
/// live entirely in [85, 170); high-tier values in [187, 224]; so 2-bit
/// quantization collapses everything but high-tier objects to one level.
fn aerial_frame(index: usize, seed: u64) -> (ImageBuffer, Vec<(i64, BoundingBox)>) {
    let (width, height) = AERIAL_DIMS[index % AERIAL_DIMS.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, index as u64 + 1));
    let coarse = ValueNoise::new(&mut rng, width, height, 48);
    let fine = ValueNoise::new(&mut rng, width, height, 12);

    let mut canvas = Canvas::new(width, height);
    for y in 0..height {
        for x in 0..width {
            let v = (100.0 + 30.0 * (0.7 * coarse.at(x, y) + 0.3 * fine.at(x, y))).round() as i16;
            canvas.set(x, y, (v - 4, v + 8, v - 10));
        }
    }

    // Every other frame gets a dark asphalt road; it stays below the ground
    // median so only deliberate objects are brighter than background.
    if index.is_multiple_of(2) {
        let span = rng.gen_range(18..=28u32);
        let vertical = rng.gen_bool(0.5);
        let limit = if vertical { width } else { height };
        let offset = rng.gen_range(limit / 5..limit - limit / 5 - span);
        for y in 0..height {
            for x in 0..width {
                let along = if vertical { x } else { y };
                if along >= offset && along < offset + span {
                    let a = 94 + (fine.at(x, y) * 4.0).round() as i16;
                    canvas.set(x, y, (a, a, a));
                }
            }
        }
    }

    let mut taken: Vec<(u32, u32, u32, u32)> = Vec::new();
    let mut truth: Vec<(i64, BoundingBox)> = Vec::new();

    let n_vehicles = 2 + index % 3;
    for i in 0..n_vehicles {
        let high = i % 2 == 0;
        let mut bw = rng.gen_range(10..=16u32);
        let mut bh = rng.gen_range(6..=9u32);
        if rng.gen_bool(0.5) {
            std::mem::swap(&mut bw, &mut bh);
        }
        if let Some((x, y)) = place(&mut rng, &taken, width, height, bw, bh) {
            canvas.fill_rect(x, y, bw, bh, vehicle_color(&mut rng, high));
            taken.push((x, y, bw, bh));
            truth.push((
                VEHICLE_CATEGORY,
                BoundingBox { x: x as f64, y: y as f64, w: bw as f64, h: bh as f64 },
            ));
        }
    }

    let n_markers = 2 + index % 2;
    for i in 0..n_markers {
        let high = i % 2 == 1;
        let r = rng.gen_range(4..=7u32);
        let d = 2 * r + 1;
        if let Some((x, y)) = place(&mut rng, &taken, width, height, d, d) {
            canvas.fill_disk(x + r, y + r, r, marker_color(&mut rng, high));
            taken.push((x, y, d, d));
            truth.push((
                MARKER_CATEGORY,
                BoundingBox { x: x as f64, y: y as f64, w: d as f64, h: d as f64 },
            ));
        }
    }

    (canvas.finish(&mut rng, 3), truth)
}

/// Photographic-style scenes: broad smooth structure, no small bright blobs,
/// so a small-object detector finds nothing in them at native depth.
fn scene_frame(index: usize, seed: u64) -> ImageBuffer {
    let (width, height) = SCENE_DIMS[index % SCENE_DIMS.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, index as u64 + 101));
    let mut canvas = Canvas::new(width, height);
    match index {
        // Dunes under a bright sky.
        0 => {
            let sky = (height as f64 * 0.4) as u32;
            for y in 0..height {
                for x in 0..width {
                    if y < sky {
                        let v = (200.0 - 50.0 * y as f64 / sky as f64).round() as i16;
                        canvas.set(x, y, (v - 18, v - 8, v));
                    } else {
                        let warp = 40.0 * (y as f64 * 3.0 * std::f64::consts::TAU / height as f64).sin();
                        let v = (105.0
                            + 25.0 * ((x as f64 + warp) * std::f64::consts::TAU / 90.0).sin())
                        .round() as i16;
                        canvas.set(x, y, (v + 10, v - 2, v - 30));
                    }
                }
            }
            canvas.finish(&mut rng, 2)
        }
        // Vignetted field: one huge bright center, dim corners.
        1 => {
            let noise = ValueNoise::new(&mut rng, width, height, 24);
            let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
            let max_d = cx.hypot(cy);
            for y in 0..height {
                for x in 0..width {
                    let d = (x as f64 - cx).hypot(y as f64 - cy);
                    let v = (200.0 - 110.0 * d / max_d + 12.0 * (noise.at(x, y) - 0.5)).round()
                        as i16;
                    canvas.set(x, y, (v - 6, v + 6, v - 24));
                }
            }
            canvas.finish(&mut rng, 2)
        }
        // Water ripples: low-contrast concentric interference.
        2 => {
            let (cx, cy) = (width as f64 * 0.42, height as f64 * 0.55);
            for y in 0..height {
                for x in 0..width {
                    let d = (x as f64 - cx).hypot(y as f64 - cy);
                    let v = (140.0 + 15.0 * (d / 7.5).sin() * (-d / 300.0).exp()).round() as i16;
                    canvas.set(x, y, (v - 12, v, v + 12));
                }
            }
            canvas.finish(&mut rng, 1)
        }
        // Wood grain with dark knots.
        3 => {
            for y in 0..height {
                for x in 0..width {
                    let wave = (y as f64 * std::f64::consts::TAU / 24.0
                        + 2.0 * (x as f64 * std::f64::consts::TAU / 160.0).sin())
                    .sin();
                    let v = (120.0 + 15.0 * wave).round() as i16;
                    canvas.set(x, y, (v + 30, v, v - 35));
                }
            }
            for _ in 0..3 {
                let kx = rng.gen_range(width / 6..width - width / 6) as f64;
                let ky = rng.gen_range(height / 6..height - height / 6) as f64;
                let (rx, ry) = (rng.gen_range(10.0..18.0), rng.gen_range(6.0..10.0));
                for y in 0..height {
                    for x in 0..width {
                        let e = ((x as f64 - kx) / rx).powi(2) + ((y as f64 - ky) / ry).powi(2);
                        if e < 1.0 {
                            let i = (y * width + x) as usize;
                            let drop = (35.0 * (1.0 - e)).round() as i16;
                            for plane in &mut canvas.planes {
                                plane[i] -= drop;
                            }
                        }
                    }
                }
            }
            canvas.finish(&mut rng, 2)
        }
        // Misty hills: bright sky gradient over dark ridge silhouettes.
        _ => {
            let phase1 = rng.gen_range(0.0..std::f64::consts::TAU);
            let phase2 = rng.gen_range(0.0..std::f64::consts::TAU);
            for y in 0..height {
                for x in 0..width {
                    let mut v = 200.0 - 100.0 * y as f64 / height as f64;
                    let ridge1 = height as f64 * 0.55
                        + 18.0 * (x as f64 * std::f64::consts::TAU / 170.0 + phase1).sin();
                    let ridge2 = height as f64 * 0.75
                        + 14.0 * (x as f64 * std::f64::consts::TAU / 110.0 + phase2).sin();
                    if (y as f64) > ridge1 {
                        v -= 45.0;
                    }
                    if (y as f64) > ridge2 {
                        v -= 25.0;
                    }
                    let v = v.round() as i16;
                    canvas.set(x, y, (v - 6, v, v + 6));
                }
            }
            canvas.finish(&mut rng, 2)
        }
    }
}

/// Synthesizes the five spectral bands for one frame from its RGB planes:
/// B/G/R are the channels themselves, NIR brightens vegetation-like ground,
/// RE sits between R and NIR.
fn band_planes(img: &ImageBuffer) -> [(&'static str, Vec<u8>); 5] {
    let n = (img.width() * img.height()) as usize;
    let s = img.samples();
    let (r, g, b) = (&s[0..n], &s[n..2 * n], &s[2 * n..3 * n]);
    let nir: Vec<u8> = g.iter().map(|&v| (v as i16 + 55).clamp(0, 255) as u8).collect();
    let re: Vec<u8> = r
        .iter()
        .zip(&nir)
        .map(|(&rv, &nv)| (rv as u16 + nv as u16).div_ceil(2) as u8)
        .collect();
    [
        ("B", b.to_vec()),
        ("G", g.to_vec()),
        ("R", r.to_vec()),
        ("RE", re),
        ("NIR", nir),
    ]
}

/// Generates the full corpus under `dir`: 25 PNGs, `annotations.json`, and
/// `bands/` with five per-band files for each of the first two frames.
/// Byte-for-byte deterministic in `seed`.
pub fn generate(dir: &Path, seed: u64) -> Result<AnnotationSet> {
    std::fs::create_dir_all(dir).map_err(Error::io_at(dir))?;
    let bands_dir = dir.join("bands");
    std::fs::create_dir_all(&bands_dir).map_err(Error::io_at(&bands_dir))?;

    let mut images = Vec::new();
    let mut annotations = Vec::new();

    for i in 0..AERIAL_COUNT {
        let (img, truth) = aerial_frame(i, seed);
        let stem = format!("img_{i:03}");
        codec::write_image(&dir.join(format!("{stem}.png")), &img, StorageFormat::Png)?;
        images.push(ImageInfo {
            id: i as i64,
            file_name: format!("{stem}.png"),
            width: img.width(),
            height: img.height(),
        });
        for (category_id, bbox) in truth {
            annotations.push(Annotation { image_id: i as i64, category_id, bbox });
        }
        if i < BAND_FRAMES {
            for (suffix, plane) in band_planes(&img) {
                let band = ImageBuffer::new(img.width(), img.height(), ColorModel::Gray, 8, plane)?;
                codec::write_image(
                    &bands_dir.join(format!("{stem}_{suffix}.png")),
                    &band,
                    StorageFormat::Png,
                )?;
            }
        }
    }

    for k in 0..SCENE_COUNT {
        let img = scene_frame(k, seed);
        let id = (AERIAL_COUNT + k) as i64;
        let stem = format!("scene_{id:03}");
        codec::write_image(&dir.join(format!("{stem}.png")), &img, StorageFormat::Png)?;
        images.push(ImageInfo {
            id,
            file_name: format!("{stem}.png"),
            width: img.width(),
            height: img.height(),
        });
    }

    let set = AnnotationSet {
        images,
        categories: vec![
            Category { id: VEHICLE_CATEGORY, name: "vehicle".to_string() },
            Category { id: MARKER_CATEGORY, name: "marker".to_string() },
        ],
        annotations,
    };
    set.validate()?;
    set.save(&dir.join("annotations.json"))?;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::read_image;
    use crate::codec::stats::list_images;

    fn walk(dir: &Path) -> Vec<(String, Vec<u8>)> {
        let mut out = Vec::new();
        let mut stack = vec![dir.to_path_buf()];
        while let Some(d) = stack.pop() {
            let mut entries: Vec<_> =
                std::fs::read_dir(&d).unwrap().map(|e| e.unwrap().path()).collect();
            entries.sort();
            for p in entries {
                if p.is_dir() {
                    stack.push(p);
                } else {
                    let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                    out.push((rel, std::fs::read(&p).unwrap()));
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn generation_is_byte_deterministic() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        generate(a.path(), DEFAULT_SEED).unwrap();
        generate(b.path(), DEFAULT_SEED).unwrap();
        let wa = walk(a.path());
        let wb = walk(b.path());
        assert_eq!(wa.len(), wb.len());
        for ((na, ba), (nb, bb)) in wa.iter().zip(&wb) {
            assert_eq!(na, nb);
            assert_eq!(ba, bb, "{na} differs between runs");
        }
    }

    #[test]
    fn corpus_shape_and_annotations() {
        let dir = tempfile::tempdir().unwrap();
        let set = generate(dir.path(), DEFAULT_SEED).unwrap();

        let files = list_images(dir.path()).unwrap();
        assert_eq!(files.len(), AERIAL_COUNT + SCENE_COUNT);
        for (i, (stem, _)) in files.iter().enumerate() {
            let info = set.image_by_stem(stem).expect("every file is declared");
            assert_eq!(info.id, i as i64, "ids follow sorted stem order");
        }

        assert_eq!(set.categories.len(), 2);
        for i in 0..AERIAL_COUNT as i64 {
            let n = set.annotations.iter().filter(|a| a.image_id == i).count();
            assert!(n >= 4, "frame {i} has only {n} objects");
        }
        assert!(
            set.annotations.iter().all(|a| a.image_id < AERIAL_COUNT as i64),
            "scenes carry no objects"
        );
        for ann in &set.annotations {
            let img = set.image(ann.image_id).unwrap();
            assert!(ann.bbox.x >= 0.0 && ann.bbox.y >= 0.0);
            assert!(ann.bbox.x + ann.bbox.w <= img.width as f64);
            assert!(ann.bbox.y + ann.bbox.h <= img.height as f64);
        }
        let vehicles = set.annotations.iter().filter(|a| a.category_id == VEHICLE_CATEGORY).count();
        let markers = set.annotations.iter().filter(|a| a.category_id == MARKER_CATEGORY).count();
        assert!(vehicles >= 40 && markers >= 40, "{vehicles} vehicles, {markers} markers");
    }

    #[test]
    fn aerial_samples_avoid_extreme_quantizer_bins() {
        // Ground and mid-tier content collapse to one 2-bit level; high-tier
        // to the next; nothing lands at 0 or 255.
        let dir = tempfile::tempdir().unwrap();
        generate(dir.path(), DEFAULT_SEED).unwrap();
        for i in 0..AERIAL_COUNT {
            let img = read_image(&dir.path().join(format!("img_{i:03}.png"))).unwrap();
            let (min, max) = img
                .samples()
                .iter()
                .fold((255u8, 0u8), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            assert!(min >= 85, "frame {i} sample {min} below the second 2-bit bin");
            assert!(max <= 224, "frame {i} sample {max} above the third 2-bit bin");
        }
    }

    #[test]
    fn band_files_cover_first_two_frames() {
        let dir = tempfile::tempdir().unwrap();
        generate(dir.path(), DEFAULT_SEED).unwrap();
        for i in 0..BAND_FRAMES {
            let parent = read_image(&dir.path().join(format!("img_{i:03}.png"))).unwrap();
            for suffix in BAND_SUFFIXES {
                let band =
                    read_image(&dir.path().join(format!("bands/img_{i:03}_{suffix}.png"))).unwrap();
                assert_eq!(band.channels(), 1);
                assert_eq!((band.width(), band.height()), (parent.width(), parent.height()));
            }
        }
    }
}
