//! Greedy non-maximum suppression over polar masks.

use crate::error::{Error, Result};
use crate::polar::{decode, PolarMask};
use crate::scoring::{fuse_score, polar_iou, RaySet};

pub const DEFAULT_NMS_IOU: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredMask {
    pub polar: PolarMask,
    pub cls_prob: f64,
    pub centerness: f64,
    pub fpn_level: usize,
}

impl ScoredMask {
    pub fn score(&self) -> f64 {
        fuse_score(self.cls_prob, self.centerness)
    }
}

/// Overlap of two polar masks.
///
/// Masks sharing a center (within 1 px) and ray count compare ray-wise with
/// the polar IoU; otherwise both are decoded onto a common local raster and
/// compared pixel-wise.
pub fn mask_overlap(a: &PolarMask, b: &PolarMask) -> Result<f64> {
    let (ca, cb) = (a.center(), b.center());
    if a.ray_count() == b.ray_count() && (ca.0 - cb.0).hypot(ca.1 - cb.1) <= 1.0 {
        return polar_iou(&RaySet::from(a), &RaySet::from(b));
    }

    let verts: Vec<(f64, f64)> = a.vertices().into_iter().chain(b.vertices()).collect();
    let (x0, y0, x1, y1) = verts.iter().fold(
        (
            f64::INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
        ),
        |(x0, y0, x1, y1), &(x, y)| (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
    );
    let ox = x0.floor() - 1.0;
    let oy = y0.floor() - 1.0;
    let w = (x1 - ox).ceil() as usize + 2;
    let h = (y1 - oy).ceil() as usize + 2;
    let shift = |p: &PolarMask| {
        PolarMask::new(
            (p.center().0 - ox, p.center().1 - oy),
            p.distances().to_vec(),
        )
    };
    let ma = decode(&shift(a)?, w, h)?;
    let mb = decode(&shift(b)?, w, h)?;
    if ma.is_empty() && mb.is_empty() {
        return Ok(0.0);
    }
    ma.iou(&mb)
}

/// Keeps the highest-scoring masks, dropping any candidate whose overlap with
/// an already kept mask reaches `iou_threshold`. Pure negative samples (all
/// sentinel rays) are removed first. Ties in score keep input order.
pub fn nms(candidates: &[ScoredMask], iou_threshold: f64) -> Result<Vec<ScoredMask>> {
    if !(0.0..=1.0).contains(&iou_threshold) {
        return Err(Error::invalid(format!(
            "IoU threshold must be in [0, 1], got {iou_threshold}"
        )));
    }
    let mut order: Vec<&ScoredMask> = candidates
        .iter()
        .filter(|c| !c.polar.is_negative())
        .collect();
    order.sort_by(|a, b| b.score().total_cmp(&a.score()));

    let mut kept: Vec<ScoredMask> = Vec::new();
    for cand in order {
        let mut suppressed = false;
        for k in &kept {
            if mask_overlap(&k.polar, &cand.polar)? >= iou_threshold {
                suppressed = true;
                break;
            }
        }
        if !suppressed {
            kept.push(cand.clone());
        }
    }
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::SENTINEL;

    fn disc(cx: f64, cy: f64, r: f64, cls: f64) -> ScoredMask {
        ScoredMask {
            polar: PolarMask::new((cx, cy), vec![r; 36]).unwrap(),
            cls_prob: cls,
            centerness: 1.0,
            fpn_level: 0,
        }
    }

    #[test]
    fn identical_masks_keep_best() {
        let out = nms(
            &[disc(10.0, 10.0, 5.0, 0.8), disc(10.0, 10.0, 5.0, 0.9)],
            0.5,
        )
        .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].cls_prob, 0.9);
    }

    #[test]
    fn disjoint_masks_survive() {
        let out = nms(
            &[disc(10.0, 10.0, 5.0, 0.8), disc(50.0, 10.0, 5.0, 0.9)],
            0.5,
        )
        .unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].cls_prob, 0.9);
    }

    #[test]
    fn sentinel_masks_are_dropped() {
        let mut neg = disc(10.0, 10.0, 5.0, 1.0);
        neg.polar = PolarMask::new((10.0, 10.0), vec![SENTINEL; 36]).unwrap();
        let out = nms(&[neg, disc(40.0, 40.0, 5.0, 0.1)], 0.5).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].cls_prob, 0.1);
    }

    #[test]
    fn shifted_centers_use_pixel_overlap() {
        let a = disc(20.0, 20.0, 10.0, 0.9);
        let b = disc(23.0, 20.0, 10.0, 0.8);
        let iou = mask_overlap(&a.polar, &b.polar).unwrap();
        assert!(iou > 0.6 && iou < 0.9, "{iou}");
        assert_eq!(nms(&[a.clone(), b.clone()], 0.5).unwrap().len(), 1);
        assert_eq!(nms(&[a, b], 0.95).unwrap().len(), 2);
    }

    #[test]
    fn rejects_bad_threshold() {
        assert!(nms(&[], 1.5).is_err());
    }
}
