//! Reference detector for end-to-end runs: finds small bright blobs against
//! the image's median luma and labels them `vehicle` (boxy) or `marker`
//! (round) by fill ratio. Deterministic, no learned weights — quality is
//! whatever survives the acquisition pipeline, which is exactly what the
//! sweep needs a fixed yardstick for.

use std::collections::VecDeque;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use pipeval::annotations::{BoundingBox, Detection, DetectionSet};
use pipeval::codec::read_image;
use pipeval::ImageBuffer;

/// Luma lift (relative to the image median) a pixel needs to count as bright.
const THRESHOLD: f64 = 20.0;
/// Component area bounds: below is sensor noise, above is background
/// structure (sky bands, vignettes), not an object.
const MIN_AREA: usize = 12;
const MAX_AREA: usize = 2000;
/// Components filling at least this fraction of their bounding box are boxy.
const RECT_FILL: f64 = 0.85;

const VEHICLE: i64 = 1;
const MARKER: i64 = 2;

#[derive(Parser)]
#[command(name = "toy-detector", about = "Brightness-blob detector over one image")]
struct Args {
    /// Image to scan (.png, .jpg, .qraw).
    #[arg(long)]
    image: PathBuf,
    /// Metadata JSON holding at least {"image_id": <int>}.
    #[arg(long)]
    meta: PathBuf,
}

fn luma_plane(img: &ImageBuffer) -> Vec<f64> {
    let n = (img.width() * img.height()) as usize;
    let channels = img.channels() as usize;
    let samples = img.samples();
    (0..n)
        .map(|i| {
            let sum: f64 = (0..channels).map(|c| samples[c * n + i] as f64).sum();
            sum / channels as f64
        })
        .collect()
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("luma values are finite"));
    sorted[sorted.len() / 2]
}

fn detect(img: &ImageBuffer, image_id: i64) -> Vec<Detection> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let luma = luma_plane(img);
    let background = median(&luma);

    let bright: Vec<bool> = luma.iter().map(|&v| v - background > THRESHOLD).collect();
    let mut seen = vec![false; w * h];
    let mut detections = Vec::new();

    for start in 0..w * h {
        if !bright[start] || seen[start] {
            continue;
        }
        // Flood-fill one 4-connected component.
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut pixels = Vec::new();
        while let Some(i) = queue.pop_front() {
            pixels.push(i);
            let (x, y) = (i % w, i / w);
            let mut push = |j: usize| {
                if bright[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                push(i - 1);
            }
            if x + 1 < w {
                push(i + 1);
            }
            if y > 0 {
                push(i - w);
            }
            if y + 1 < h {
                push(i + w);
            }
        }

        if pixels.len() < MIN_AREA || pixels.len() > MAX_AREA {
            continue;
        }
        let (mut min_x, mut min_y, mut max_x, mut max_y) = (w, h, 0usize, 0usize);
        let mut lift = 0.0;
        for &i in &pixels {
            let (x, y) = (i % w, i / w);
            min_x = min_x.min(x);
            min_y = min_y.min(y);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
            lift += luma[i] - background;
        }
        let box_w = max_x - min_x + 1;
        let box_h = max_y - min_y + 1;
        let fill = pixels.len() as f64 / (box_w * box_h) as f64;
        let category_id = if fill >= RECT_FILL { VEHICLE } else { MARKER };
        let score = (lift / pixels.len() as f64 / 100.0).clamp(0.05, 1.0);
        detections.push(Detection {
            image_id,
            category_id,
            bbox: BoundingBox {
                x: min_x as f64,
                y: min_y as f64,
                w: box_w as f64,
                h: box_h as f64,
            },
            score,
        });
    }
    detections
}

fn run(args: &Args) -> anyhow::Result<()> {
    let meta_text = std::fs::read_to_string(&args.meta)?;
    let meta: serde_json::Value = serde_json::from_str(&meta_text)?;
    let image_id = meta.get("image_id").and_then(|v| v.as_i64()).unwrap_or(0);

    let img = read_image(&args.image)?;
    let set = DetectionSet { detections: detect(&img, image_id), ..DetectionSet::default() };
    println!("{}", serde_json::to_string_pretty(&set)?);
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("toy-detector: {err:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pipeval::ColorModel;

    fn flat_gray(w: u32, h: u32, value: u8) -> Vec<u8> {
        vec![value; (w * h) as usize]
    }

    fn paint_rect(plane: &mut [u8], w: u32, x: u32, y: u32, bw: u32, bh: u32, value: u8) {
        for yy in y..y + bh {
            for xx in x..x + bw {
                plane[(yy * w + xx) as usize] = value;
            }
        }
    }

    fn paint_disk(plane: &mut [u8], w: u32, cx: u32, cy: u32, r: u32, value: u8) {
        let r2 = (r * r) as i64;
        for dy in -(r as i64)..=r as i64 {
            for dx in -(r as i64)..=r as i64 {
                if dx * dx + dy * dy <= r2 {
                    let (x, y) = ((cx as i64 + dx) as u32, (cy as i64 + dy) as u32);
                    plane[(y * w + x) as usize] = value;
                }
            }
        }
    }

    #[test]
    fn finds_rect_and_disk_with_right_labels() {
        let (w, h) = (64u32, 48u32);
        let mut plane = flat_gray(w, h, 100);
        paint_rect(&mut plane, w, 10, 10, 12, 7, 180);
        paint_disk(&mut plane, w, 45, 30, 5, 170);
        let img = ImageBuffer::new(w, h, ColorModel::Gray, 8, plane).unwrap();

        let found = detect(&img, 7);
        assert_eq!(found.len(), 2);
        let rect = found.iter().find(|d| d.category_id == VEHICLE).expect("rect found");
        assert_eq!(
            (rect.bbox.x, rect.bbox.y, rect.bbox.w, rect.bbox.h),
            (10.0, 10.0, 12.0, 7.0)
        );
        let disk = found.iter().find(|d| d.category_id == MARKER).expect("disk found");
        assert_eq!((disk.bbox.x, disk.bbox.y), (40.0, 25.0));
        assert_eq!((disk.bbox.w, disk.bbox.h), (11.0, 11.0));
        assert!(found.iter().all(|d| d.image_id == 7));
        assert!(rect.score > disk.score, "brighter blob scores higher");
    }

    #[test]
    fn low_contrast_and_huge_regions_are_ignored() {
        let (w, h) = (80u32, 60u32);
        let mut plane = flat_gray(w, h, 100);
        // Below threshold.
        paint_rect(&mut plane, w, 5, 5, 10, 6, 115);
        // Bright but tiny.
        paint_rect(&mut plane, w, 30, 8, 2, 2, 200);
        // Bright but covers more than MAX_AREA pixels.
        paint_rect(&mut plane, w, 0, 25, 80, 30, 190);
        let img = ImageBuffer::new(w, h, ColorModel::Gray, 8, plane).unwrap();
        assert!(detect(&img, 0).is_empty());
    }

    #[test]
    fn rgb_luma_uses_channel_mean() {
        let (w, h) = (40u32, 30u32);
        let n = (w * h) as usize;
        let mut samples = vec![100u8; 3 * n];
        // Object bright in all channels.
        for c in 0..3 {
            let plane = &mut samples[c * n..(c + 1) * n];
            paint_rect(plane, w, 12, 12, 10, 8, 170);
        }
        let img = ImageBuffer::new(w, h, ColorModel::Rgb, 8, samples).unwrap();
        let found = detect(&img, 1);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].category_id, VEHICLE);
    }
}
