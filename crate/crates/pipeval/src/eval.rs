//! Detection scoring: IoU, greedy matching at a fixed IoU threshold, and
//! all-point interpolated average precision, averaged over categories that
//! have at least one ground-truth box (mAP@0.5 by default).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::annotations::{AnnotationSet, BoundingBox, Detection, DetectionSet};
use crate::error::{Error, Result};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

/// Intersection over union of two axis-aligned boxes. Degenerate unions
/// (both boxes empty) score 0.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let ix = (a.x + a.w).min(b.x + b.w) - a.x.max(b.x);
    let iy = (a.y + a.h).min(b.y + b.h) - a.y.max(b.y);
    if ix <= 0.0 || iy <= 0.0 {
        return 0.0;
    }
    let inter = ix * iy;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    inter / union
}

/// One detection's fate after matching: `Some(gt_index)` pairs it with a
/// ground-truth box, `None` marks it a false positive.
pub type MatchOutcome = Option<usize>;

/// Greedy matcher for a single image+category group.
///
/// Detections are visited in descending score order (ties keep input order);
/// each claims the unmatched ground-truth box of highest IoU >= `threshold`
/// (IoU ties resolve to the lowest ground-truth index). Ground-truth boxes
/// match at most once.
pub fn match_detections(
    detections: &[Detection],
    truths: &[BoundingBox],
    threshold: f64,
) -> Vec<MatchOutcome> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| {
        detections[b]
            .score
            .partial_cmp(&detections[a].score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut taken = vec![false; truths.len()];
    let mut outcome: Vec<MatchOutcome> = vec![None; detections.len()];
    for det_idx in order {
        let mut best: Option<(usize, f64)> = None;
        for (gt_idx, gt) in truths.iter().enumerate() {
            if taken[gt_idx] {
                continue;
            }
            let overlap = iou(&detections[det_idx].bbox, gt);
            if overlap < threshold {
                continue;
            }
            let better = match best {
                None => true,
                Some((_, best_iou)) => overlap > best_iou,
            };
            if better {
                best = Some((gt_idx, overlap));
            }
        }
        if let Some((gt_idx, _)) = best {
            taken[gt_idx] = true;
            outcome[det_idx] = Some(gt_idx);
        }
    }
    outcome
}

/// All-point interpolated average precision from a ranked tp/fp sequence.
///
/// Returns `None` when there is no ground truth to recall.
pub fn average_precision(ranked_tp: &[bool], total_truth: usize) -> Option<f64> {
    if total_truth == 0 {
        return None;
    }
    // Precision/recall after every rank.
    let mut precisions = Vec::with_capacity(ranked_tp.len());
    let mut recalls = Vec::with_capacity(ranked_tp.len());
    let mut tp = 0usize;
    for (rank, &is_tp) in ranked_tp.iter().enumerate() {
        if is_tp {
            tp += 1;
        }
        precisions.push(tp as f64 / (rank + 1) as f64);
        recalls.push(tp as f64 / total_truth as f64);
    }
    // Monotone (non-increasing) precision envelope, right to left.
    for i in (0..precisions.len().saturating_sub(1)).rev() {
        if precisions[i] < precisions[i + 1] {
            precisions[i] = precisions[i + 1];
        }
    }
    // Sum precision * recall increments at points where recall advances.
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for i in 0..precisions.len() {
        if recalls[i] > prev_recall {
            ap += (recalls[i] - prev_recall) * precisions[i];
            prev_recall = recalls[i];
        }
    }
    Some(ap)
}

/// Per-category scoring detail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryEval {
    pub category_id: i64,
    pub truth_count: usize,
    pub detection_count: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub missed: usize,
    /// `None` when the category has no ground truth (excluded from the mean).
    pub average_precision: Option<f64>,
}

/// Corpus-level evaluation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub iou_threshold: f64,
    pub categories: BTreeMap<i64, CategoryEval>,
    /// Mean AP over categories with ground truth; `None` if no such category.
    pub map: Option<f64>,
}

/// Scores `detections` against `truth` at the given IoU threshold.
///
/// Detections referencing image ids absent from the ground-truth set are
/// rejected; the caller should rescale ground truth first when the variant
/// corpus changed resolution.
pub fn evaluate(truth: &AnnotationSet, detections: &DetectionSet, threshold: f64) -> Result<EvalResult> {
    truth.validate()?;
    detections.validate()?;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Schema(format!("IoU threshold {threshold} outside (0, 1)")));
    }
    let known_images: BTreeSet<i64> = truth.images.iter().map(|i| i.id).collect();
    let known_categories: BTreeSet<i64> = truth.categories.iter().map(|c| c.id).collect();
    for det in &detections.detections {
        if !known_images.contains(&det.image_id) {
            return Err(Error::UnknownImageId(det.image_id));
        }
        if !known_categories.contains(&det.category_id) {
            return Err(Error::UnknownCategoryId(det.category_id));
        }
    }

    // Ground truth grouped by (category, image).
    let mut truth_groups: HashMap<(i64, i64), Vec<BoundingBox>> = HashMap::new();
    let mut truth_totals: BTreeMap<i64, usize> = known_categories.iter().map(|&c| (c, 0)).collect();
    for ann in &truth.annotations {
        truth_groups.entry((ann.category_id, ann.image_id)).or_default().push(ann.bbox);
        *truth_totals.entry(ann.category_id).or_default() += 1;
    }

    // Detections grouped by (category, image), carrying global indices so
    // the final per-category ranking is deterministic: score descending,
    // original detection index ascending.
    let mut det_order: Vec<usize> = (0..detections.detections.len()).collect();
    det_order.sort_by(|&a, &b| {
        detections.detections[b]
            .score
            .partial_cmp(&detections.detections[a].score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut det_groups: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for &idx in &det_order {
        let det = &detections.detections[idx];
        det_groups.entry((det.category_id, det.image_id)).or_default().push(idx);
    }

    // Match per group, then assemble each category's ranked tp/fp sequence
    // keyed by global rank.
    let mut ranked: BTreeMap<i64, Vec<(usize, bool)>> = BTreeMap::new();
    for ((cat, img), indices) in &det_groups {
        let empty = Vec::new();
        let truths = truth_groups.get(&(*cat, *img)).unwrap_or(&empty);
        let dets: Vec<Detection> = indices.iter().map(|&i| detections.detections[i].clone()).collect();
        let outcomes = match_detections(&dets, truths, threshold);
        for (&idx, outcome) in indices.iter().zip(&outcomes) {
            ranked.entry(*cat).or_default().push((idx, outcome.is_some()));
        }
    }
    let global_rank: HashMap<usize, usize> =
        det_order.iter().enumerate().map(|(rank, &idx)| (idx, rank)).collect();
    let mut categories = BTreeMap::new();
    let mut ap_values = Vec::new();
    for &cat in &known_categories {
        let mut seq = ranked.remove(&cat).unwrap_or_default();
        seq.sort_by_key(|&(idx, _)| global_rank[&idx]);
        let flags: Vec<bool> = seq.iter().map(|&(_, tp)| tp).collect();
        let truth_count = truth_totals.get(&cat).copied().unwrap_or(0);
        let tp = flags.iter().filter(|&&f| f).count();
        let ap = average_precision(&flags, truth_count);
        if let Some(v) = ap {
            ap_values.push(v);
        }
        categories.insert(
            cat,
            CategoryEval {
                category_id: cat,
                truth_count,
                detection_count: flags.len(),
                true_positives: tp,
                false_positives: flags.len() - tp,
                missed: truth_count - tp,
                average_precision: ap,
            },
        );
    }
    let map = if ap_values.is_empty() {
        None
    } else {
        Some(ap_values.iter().sum::<f64>() / ap_values.len() as f64)
    };
    Ok(EvalResult { iou_threshold: threshold, categories, map })
}


#[cfg(test)]
mod properties {
    use super::*;
    use crate::annotations::{
        Annotation, AnnotationSet, BoundingBox, Category, Detection, DetectionSet, ImageInfo,
    };
    use proptest::prelude::*;

    fn arb_box() -> impl Strategy<Value = BoundingBox> {
        (0.0..60.0f64, 0.0..60.0f64, 0.1..40.0f64, 0.1..40.0f64)
            .prop_map(|(x, y, w, h)| BoundingBox { x, y, w, h })
    }

    #[derive(Debug, Clone)]
    struct Case {
        truth: AnnotationSet,
        detections: DetectionSet,
    }

    fn arb_case() -> impl Strategy<Value = Case> {
        let images = 1..4i64;
        let anns = proptest::collection::vec((0..4i64, 1..3i64, arb_box()), 0..8);
        let dets = proptest::collection::vec((0..4i64, 1..3i64, arb_box(), 0.0..=1.0f64), 0..10);
        (images, anns, dets).prop_map(|(n_images, anns, dets)| {
            let images: Vec<ImageInfo> = (0..n_images)
                .map(|id| ImageInfo {
                    id,
                    file_name: format!("img_{id}.png"),
                    width: 100,
                    height: 100,
                })
                .collect();
            let truth = AnnotationSet {
                images: images.clone(),
                categories: vec![
                    Category { id: 1, name: "vehicle".into() },
                    Category { id: 2, name: "marker".into() },
                ],
                annotations: anns
                    .into_iter()
                    .map(|(img, cat, bbox)| Annotation {
                        image_id: img % n_images,
                        category_id: cat,
                        bbox,
                    })
                    .collect(),
            };
            let detections = DetectionSet {
                detections: dets
                    .into_iter()
                    .map(|(img, cat, bbox, score)| Detection {
                        image_id: img % n_images,
                        category_id: cat,
                        bbox,
                        score,
                    })
                    .collect(),
                ..DetectionSet::default()
            };
            Case { truth, detections }
        })
    }

    proptest! {
        #[test]
        fn iou_is_bounded_and_symmetric(a in arb_box(), b in arb_box()) {
            let ab = iou(&a, &b);
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert!((ab - iou(&b, &a)).abs() < 1e-12);
        }

        #[test]
        fn iou_of_a_box_with_itself_is_one(a in arb_box()) {
            prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn evaluation_counts_and_scores_stay_in_bounds(case in arb_case()) {
            let result = evaluate(&case.truth, &case.detections, 0.5).unwrap();
            if let Some(map) = result.map {
                prop_assert!((0.0..=1.0).contains(&map));
            } else {
                prop_assert!(case.truth.annotations.is_empty());
            }
            for cat in result.categories.values() {
                prop_assert!(cat.true_positives <= cat.detection_count);
                prop_assert!(cat.true_positives <= cat.truth_count);
                prop_assert_eq!(cat.true_positives + cat.false_positives, cat.detection_count);
                prop_assert_eq!(cat.true_positives + cat.missed, cat.truth_count);
                if let Some(ap) = cat.average_precision {
                    prop_assert!((0.0..=1.0).contains(&ap));
                } else {
                    prop_assert_eq!(cat.truth_count, 0);
                }
            }
        }

        #[test]
        fn matches_never_exceed_either_side(
            dets in proptest::collection::vec((arb_box(), 0.0..=1.0f64), 0..8),
            truth in proptest::collection::vec(arb_box(), 0..6),
        ) {
            let dets: Vec<Detection> = dets
                .into_iter()
                .map(|(bbox, score)| Detection { image_id: 0, category_id: 1, bbox, score })
                .collect();
            let matched = match_detections(&dets, &truth, 0.5);
            prop_assert_eq!(matched.len(), dets.len());
            let hits: Vec<usize> = matched.iter().flatten().copied().collect();
            let mut unique = hits.clone();
            unique.sort_unstable();
            unique.dedup();
            prop_assert_eq!(unique.len(), hits.len(), "each truth box is used at most once");
            prop_assert!(hits.iter().all(|&g| g < truth.len()));
        }
    }
}
