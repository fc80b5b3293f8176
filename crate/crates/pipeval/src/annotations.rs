//! COCO-style annotation and detection sets: a JSON subset with images,
//! categories, and axis-aligned (x, y, w, h) boxes anchored at the top left.
//! Formal schemas live under `schemas/` in the repository root.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box geometry, serialized as the 4-element array
/// `[x, y, w, h]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl From<[f64; 4]> for BoundingBox {
    fn from(v: [f64; 4]) -> Self {
        BoundingBox { x: v[0], y: v[1], w: v[2], h: v[3] }
    }
}

impl From<BoundingBox> for [f64; 4] {
    fn from(b: BoundingBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> BoundingBox {
        BoundingBox { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    fn scaled(&self, sx: f64, sy: f64) -> BoundingBox {
        BoundingBox { x: self.x * sx, y: self.y * sy, w: self.w * sx, h: self.h * sy }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageInfo {
    pub id: i64,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub id: i64,
    pub name: String,
}

/// One ground-truth box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub image_id: i64,
    pub category_id: i64,
    pub bbox: BoundingBox,
}

/// One scored detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub image_id: i64,
    pub category_id: i64,
    pub bbox: BoundingBox,
    pub score: f64,
}

/// Ground truth for a corpus.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub images: Vec<ImageInfo>,
    pub categories: Vec<Category>,
    pub annotations: Vec<Annotation>,
}

/// Detector output; `images`/`categories` may be omitted when the consumer
/// resolves ids against a ground-truth set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DetectionSet {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub images: Vec<ImageInfo>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<Category>,
    pub detections: Vec<Detection>,
}

fn check_ids(images: &[ImageInfo], categories: &[Category]) -> Result<()> {
    let mut seen = HashSet::new();
    for img in images {
        if !seen.insert(img.id) {
            return Err(Error::Schema(format!("duplicate image id {}", img.id)));
        }
        if img.width == 0 || img.height == 0 {
            return Err(Error::Schema(format!("image {} has zero dimensions", img.id)));
        }
    }
    let mut seen = HashSet::new();
    for cat in categories {
        if !seen.insert(cat.id) {
            return Err(Error::Schema(format!("duplicate category id {}", cat.id)));
        }
    }
    Ok(())
}

fn check_box(bbox: &BoundingBox, require_positive: bool) -> Result<()> {
    let vals = [bbox.x, bbox.y, bbox.w, bbox.h];
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Schema(format!("non-finite bbox {vals:?}")));
    }
    if bbox.w < 0.0 || bbox.h < 0.0 || (require_positive && (bbox.w == 0.0 || bbox.h == 0.0)) {
        return Err(Error::Schema(format!("bbox extents must be positive, got {}x{}", bbox.w, bbox.h)));
    }
    Ok(())
}

impl AnnotationSet {
    pub fn load(path: &Path) -> Result<AnnotationSet> {
        let text = std::fs::read_to_string(path).map_err(Error::io_at(path))?;
        let set: AnnotationSet = serde_json::from_str(&text)?;
        set.validate()?;
        Ok(set)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(Error::io_at(path))
    }

    /// Checks id resolution, uniqueness, and box extents.
    pub fn validate(&self) -> Result<()> {
        check_ids(&self.images, &self.categories)?;
        let image_ids: HashSet<i64> = self.images.iter().map(|i| i.id).collect();
        let category_ids: HashSet<i64> = self.categories.iter().map(|c| c.id).collect();
        for ann in &self.annotations {
            if !image_ids.contains(&ann.image_id) {
                return Err(Error::UnknownImageId(ann.image_id));
            }
            if !category_ids.contains(&ann.category_id) {
                return Err(Error::UnknownCategoryId(ann.category_id));
            }
            check_box(&ann.bbox, true)?;
        }
        Ok(())
    }

    pub fn image(&self, id: i64) -> Option<&ImageInfo> {
        self.images.iter().find(|i| i.id == id)
    }

    pub fn image_by_stem(&self, stem: &str) -> Option<&ImageInfo> {
        self.images
            .iter()
            .find(|i| Path::new(&i.file_name).file_stem().and_then(|s| s.to_str()) == Some(stem))
    }

    /// Rescales boxes (and declared image sizes) to new per-image dimensions,
    /// e.g. after a resize transform; ids without an entry keep their scale.
    pub fn rescaled(&self, dims: &HashMap<i64, (u32, u32)>) -> AnnotationSet {
        let mut out = self.clone();
        let mut factors: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
        for img in &mut out.images {
            if let Some(&(nw, nh)) = dims.get(&img.id) {
                factors.insert(img.id, (nw as f64 / img.width as f64, nh as f64 / img.height as f64));
                img.width = nw;
                img.height = nh;
            }
        }
        for ann in &mut out.annotations {
            if let Some(&(sx, sy)) = factors.get(&ann.image_id) {
                ann.bbox = ann.bbox.scaled(sx, sy);
            }
        }
        out
    }
}

impl DetectionSet {
    pub fn load(path: &Path) -> Result<DetectionSet> {
        let text = std::fs::read_to_string(path).map_err(Error::io_at(path))?;
        DetectionSet::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<DetectionSet> {
        let set: DetectionSet = serde_json::from_str(text)?;
        set.validate()?;
        Ok(set)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(Error::io_at(path))
    }

    /// Checks score ranges, box extents, and (when the file carries its own
    /// id tables) id resolution.
    pub fn validate(&self) -> Result<()> {
        check_ids(&self.images, &self.categories)?;
        let image_ids: HashSet<i64> = self.images.iter().map(|i| i.id).collect();
        let category_ids: HashSet<i64> = self.categories.iter().map(|c| c.id).collect();
        for det in &self.detections {
            if !det.score.is_finite() || !(0.0..=1.0).contains(&det.score) {
                return Err(Error::Schema(format!("score {} outside [0, 1]", det.score)));
            }
            check_box(&det.bbox, false)?;
            if !self.images.is_empty() && !image_ids.contains(&det.image_id) {
                return Err(Error::UnknownImageId(det.image_id));
            }
            if !self.categories.is_empty() && !category_ids.contains(&det.category_id) {
                return Err(Error::UnknownCategoryId(det.category_id));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> AnnotationSet {
        AnnotationSet {
            images: vec![ImageInfo { id: 1, file_name: "img_000.png".into(), width: 64, height: 32 }],
            categories: vec![Category { id: 1, name: "vehicle".into() }],
            annotations: vec![Annotation {
                image_id: 1,
                category_id: 1,
                bbox: BoundingBox::new(4.0, 6.0, 10.0, 8.0),
            }],
        }
    }

    #[test]
    fn minimal_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ann.json");
        let set = minimal();
        set.save(&path).unwrap();
        let back = AnnotationSet::load(&path).unwrap();
        assert_eq!(back, set);
        assert_eq!(back.annotations.len(), 1);
    }

    #[test]
    fn bbox_serializes_as_an_array() {
        let json = serde_json::to_string(&BoundingBox::new(1.0, 2.0, 3.0, 4.0)).unwrap();
        assert_eq!(json, "[1.0,2.0,3.0,4.0]");
    }

    #[test]
    fn out_of_range_score_is_a_schema_error() {
        let det = DetectionSet {
            detections: vec![Detection {
                image_id: 1,
                category_id: 1,
                bbox: BoundingBox::new(0.0, 0.0, 1.0, 1.0),
                score: 1.2,
            }],
            ..DetectionSet::default()
        };
        assert!(matches!(det.validate(), Err(Error::Schema(_))));
    }

    #[test]
    fn unknown_ids_are_rejected() {
        let mut set = minimal();
        set.annotations[0].image_id = 99;
        assert!(matches!(set.validate(), Err(Error::UnknownImageId(99))));
        let mut set = minimal();
        set.annotations[0].category_id = 42;
        assert!(matches!(set.validate(), Err(Error::UnknownCategoryId(42))));
    }

    #[test]
    fn negative_extent_is_rejected() {
        let mut set = minimal();
        set.annotations[0].bbox.w = -3.0;
        assert!(set.validate().is_err());
    }

    #[test]
    fn rescaling_halves_coordinates() {
        let set = minimal();
        let dims: HashMap<i64, (u32, u32)> = [(1, (32u32, 16u32))].into();
        let scaled = set.rescaled(&dims);
        assert_eq!(scaled.images[0].width, 32);
        let b = scaled.annotations[0].bbox;
        assert_eq!((b.x, b.y, b.w, b.h), (2.0, 3.0, 5.0, 4.0));
    }

    #[test]
    fn load_save_round_trip_preserves_floats_to_micro_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("det.json");
        let det = DetectionSet {
            detections: vec![Detection {
                image_id: 1,
                category_id: 2,
                bbox: BoundingBox::new(0.123456, 9.87654, 3.5, 4.25),
                score: 0.654321,
            }],
            ..DetectionSet::default()
        };
        det.save(&path).unwrap();
        let back = DetectionSet::load(&path).unwrap();
        let (a, b) = (&det.detections[0], &back.detections[0]);
        assert!((a.bbox.x - b.bbox.x).abs() < 1e-6);
        assert!((a.score - b.score).abs() < 1e-6);
    }
}
