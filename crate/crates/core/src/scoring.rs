//! Training losses, centerness scores and polar IoU.

use crate::error::{Error, Result};
use crate::polar::PolarMask;

/// Ray lengths aligned index-wise with a polar mask's angles; all positive.
#[derive(Clone, Debug, PartialEq)]
pub struct RaySet(Vec<f64>);

impl RaySet {
    pub fn new(distances: Vec<f64>) -> Result<Self> {
        if distances.is_empty() {
            return Err(Error::invalid("ray set needs at least one ray"));
        }
        if let Some(d) = distances.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(Error::invalid(format!(
                "ray lengths must be positive, got {d}"
            )));
        }
        Ok(Self(distances))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn min_mean_max(&self) -> (f64, f64, f64) {
        let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for &d in &self.0 {
            lo = lo.min(d);
            hi = hi.max(d);
            sum += d;
        }
        (lo, sum / self.0.len() as f64, hi)
    }
}

impl From<&PolarMask> for RaySet {
    fn from(p: &PolarMask) -> Self {
        RaySet(p.distances().to_vec())
    }
}

/// Which classification loss to evaluate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FocalMode {
    /// `-(1 - p_pred * p_gt)^γ · ln(p_pred)`, applied to every sample.
    #[default]
    SingleBranch,
    /// Two-branch focal loss: `-p_gt (1-p)^γ ln p - (1-p_gt) p^γ ln(1-p)`.
    TwoBranch,
}

pub const DEFAULT_GAMMA: f64 = 2.0;

pub fn focal_loss(p_pred: f64, p_gt: f64, gamma: f64) -> Result<f64> {
    focal_loss_with(p_pred, p_gt, gamma, FocalMode::SingleBranch)
}

pub fn focal_loss_with(p_pred: f64, p_gt: f64, gamma: f64, mode: FocalMode) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_gt) {
        return Err(Error::invalid(format!(
            "p_gt must be in [0, 1], got {p_gt}"
        )));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!(
            "gamma must be non-negative, got {gamma}"
        )));
    }
    match mode {
        FocalMode::SingleBranch => {
            if !(p_pred > 0.0 && p_pred <= 1.0) {
                return Err(Error::invalid(format!(
                    "p_pred must be in (0, 1], got {p_pred}"
                )));
            }
            Ok(-(1.0 - p_pred * p_gt).powf(gamma) * p_pred.ln())
        }
        FocalMode::TwoBranch => {
            if !(0.0..=1.0).contains(&p_pred) {
                return Err(Error::invalid(format!(
                    "p_pred must be in [0, 1], got {p_pred}"
                )));
            }
            let pos = if p_gt > 0.0 {
                if p_pred == 0.0 {
                    return Err(Error::invalid("p_pred = 0 with positive target"));
                }
                -p_gt * (1.0 - p_pred).powf(gamma) * p_pred.ln()
            } else {
                0.0
            };
            let neg = if p_gt < 1.0 {
                if p_pred == 1.0 {
                    return Err(Error::invalid("p_pred = 1 with negative target"));
                }
                -(1.0 - p_gt) * p_pred.powf(gamma) * (1.0 - p_pred).ln()
            } else {
                0.0
            };
            Ok(pos + neg)
        }
    }
}

/// Signed box-side offsets `pred - gt` for top, bottom, left and right.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BBoxDeltas {
    pub t: f64,
    pub b: f64,
    pub l: f64,
    pub r: f64,
}

/// Smooth-L1 summed over the four box sides.
pub fn smooth_l1_bbox(deltas: &BBoxDeltas) -> f64 {
    [deltas.t, deltas.b, deltas.l, deltas.r]
        .into_iter()
        .map(|d| {
            if d.abs() <= 1.0 {
                0.5 * d * d
            } else {
                d.abs() - 0.5
            }
        })
        .sum()
}

/// `sqrt(min / max)`.
pub fn polar_centerness_original(rays: &RaySet) -> f64 {
    let (lo, _, hi) = rays.min_mean_max();
    (lo / hi).sqrt()
}

/// `sqrt(0.5 * (min / mean + mean / max))`.
pub fn polar_centerness_improved(rays: &RaySet) -> f64 {
    let (lo, mean, hi) = rays.min_mean_max();
    if lo == hi {
        // A summed mean can miss `lo` by an ulp.
        return 1.0;
    }
    (0.5 * (lo / mean + mean / hi)).sqrt()
}

/// Inference confidence: classification probability times centerness.
pub fn fuse_score(cls_prob: f64, centerness: f64) -> f64 {
    cls_prob * centerness
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum IouMode {
    /// `Σ min / Σ max`, the form used by the mask loss.
    #[default]
    Linear,
    /// `Σ min² / Σ max²`, the sector-area form.
    Squared,
}

fn check_lengths(d: &RaySet, d_star: &RaySet) -> Result<()> {
    if d.len() != d_star.len() {
        return Err(Error::LengthMismatch {
            left: d.len(),
            right: d_star.len(),
        });
    }
    Ok(())
}

pub fn polar_iou(d: &RaySet, d_star: &RaySet) -> Result<f64> {
    polar_iou_with(d, d_star, IouMode::Linear)
}

pub fn polar_iou_with(d: &RaySet, d_star: &RaySet, mode: IouMode) -> Result<f64> {
    check_lengths(d, d_star)?;
    let power = |v: f64| match mode {
        IouMode::Linear => v,
        IouMode::Squared => v * v,
    };
    let (inter, union) = d
        .as_slice()
        .iter()
        .zip(d_star.as_slice())
        .fold((0.0, 0.0), |(i, u), (&a, &b)| {
            (i + power(a.min(b)), u + power(a.max(b)))
        });
    Ok(inter / union)
}

/// Mask loss `ln(Σ max / Σ min)` and its gradient with respect to the
/// predicted rays `d_star`.
///
/// Where `d_i == d*_i` the prediction is treated as the min branch, giving
/// `-1 / Σ min` for that coordinate.
pub fn polar_iou_loss(d: &RaySet, d_star: &RaySet) -> Result<(f64, Vec<f64>)> {
    check_lengths(d, d_star)?;
    let (mut sum_min, mut sum_max) = (0.0, 0.0);
    for (&t, &p) in d.as_slice().iter().zip(d_star.as_slice()) {
        sum_min += t.min(p);
        sum_max += t.max(p);
    }
    let loss = (sum_max / sum_min).ln();
    let grad = d
        .as_slice()
        .iter()
        .zip(d_star.as_slice())
        .map(|(&t, &p)| if p > t { 1.0 / sum_max } else { -1.0 / sum_min })
        .collect();
    Ok((loss, grad))
}

/// `cls * centerness + bbox + mask`.
pub fn total_loss(cls: f64, centerness: f64, bbox: f64, mask: f64) -> f64 {
    cls * centerness + bbox + mask
}

pub const DEFAULT_SCALE_RANGES: [(f64, f64); 5] = [
    (-1.0, 256.0),
    (256.0, 512.0),
    (512.0, 1024.0),
    (1024.0, 2048.0),
    (2048.0, 1e8),
];

/// Pyramid level whose `(low, high]` range holds twice the longest ray;
/// values past every range go to the last level.
pub fn assign_fpn_level(polar: &PolarMask, ranges: &[(f64, f64)]) -> Result<usize> {
    if ranges.is_empty() {
        return Err(Error::invalid("no scale ranges"));
    }
    if ranges.windows(2).any(|w| w[0].1 != w[1].0) || ranges.iter().any(|r| r.0 >= r.1) {
        return Err(Error::invalid("scale ranges must be sorted and contiguous"));
    }
    let size = 2.0 * polar.max_distance();
    Ok(ranges
        .iter()
        .position(|&(lo, hi)| size > lo && size <= hi)
        .unwrap_or(if size <= ranges[0].0 {
            0
        } else {
            ranges.len() - 1
        }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rays(v: &[f64]) -> RaySet {
        RaySet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn focal_examples() {
        assert_eq!(focal_loss(1.0, 1.0, 2.0).unwrap(), 0.0);
        assert!((focal_loss(0.5, 1.0, 2.0).unwrap() - 0.25 * 2f64.ln()).abs() < 1e-15);
        assert!((focal_loss(0.5, 0.0, 2.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(focal_loss(0.0, 1.0, 2.0).is_err());
        assert!(focal_loss(0.5, 1.5, 2.0).is_err());
    }

    #[test]
    fn standard_focal_differs_on_negatives() {
        // Negative sample: -(0.5^2) ln(0.5)
        let v = focal_loss_with(0.5, 0.0, 2.0, FocalMode::TwoBranch).unwrap();
        assert!((v - 0.25 * 2f64.ln()).abs() < 1e-15);
        let pos = focal_loss_with(0.5, 1.0, 2.0, FocalMode::TwoBranch).unwrap();
        assert!((pos - focal_loss(0.5, 1.0, 2.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn smooth_l1_examples() {
        assert_eq!(smooth_l1_bbox(&BBoxDeltas::default()), 0.0);
        assert_eq!(
            smooth_l1_bbox(&BBoxDeltas {
                t: 0.5,
                ..Default::default()
            }),
            0.125
        );
        assert_eq!(
            smooth_l1_bbox(&BBoxDeltas {
                t: 2.0,
                ..Default::default()
            }),
            1.5
        );
        assert_eq!(
            smooth_l1_bbox(&BBoxDeltas {
                t: -2.0,
                b: 1.0,
                l: -0.5,
                r: 0.0
            }),
            1.5 + 0.5 + 0.125
        );
    }

    #[test]
    fn centerness_examples() {
        assert_eq!(polar_centerness_original(&rays(&[5.0; 4])), 1.0);
        assert_eq!(polar_centerness_improved(&rays(&[5.0; 4])), 1.0);
        let third = (1.0f64 / 3.0).sqrt();
        assert!((polar_centerness_original(&rays(&[1.0, 2.0, 3.0])) - third).abs() < 1e-15);
        assert!((polar_centerness_original(&rays(&[1.0, 3.0, 3.0])) - third).abs() < 1e-15);
        assert!(
            (polar_centerness_improved(&rays(&[1.0, 2.0, 3.0])) - (7.0f64 / 12.0).sqrt()).abs()
                < 1e-15
        );
        assert!(
            (polar_centerness_improved(&rays(&[1.0, 3.0, 3.0])) - (38.0f64 / 63.0).sqrt()).abs()
                < 1e-15
        );
        assert!(RaySet::new(vec![1.0, 0.0]).is_err());
        assert!(RaySet::new(vec![]).is_err());
    }

    #[test]
    fn iou_examples() {
        let a = rays(&[2.0, 2.0]);
        let b = rays(&[1.0, 1.0]);
        assert_eq!(polar_iou(&a, &a).unwrap(), 1.0);
        assert_eq!(polar_iou(&a, &b).unwrap(), 0.5);
        assert_eq!(polar_iou_with(&a, &b, IouMode::Squared).unwrap(), 0.25);
        let c = rays(&[1.0, 3.0]);
        let d = rays(&[3.0, 1.0]);
        assert!((polar_iou(&c, &d).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(polar_iou(&a, &rays(&[1.0])).is_err());
    }

    #[test]
    fn iou_loss_examples() {
        let a = rays(&[2.0, 2.0]);
        let (l0, g0) = polar_iou_loss(&a, &a).unwrap();
        assert_eq!(l0, 0.0);
        assert_eq!(g0, vec![-0.25, -0.25]);
        let (l, g) = polar_iou_loss(&a, &rays(&[1.0, 1.0])).unwrap();
        assert!((l - 2f64.ln()).abs() < 1e-15);
        assert_eq!(g, vec![-0.5, -0.5]);
        let (_, g) = polar_iou_loss(&a, &rays(&[3.0, 1.0])).unwrap();
        assert_eq!(g, vec![1.0 / 5.0, -1.0 / 3.0]);
    }

    #[test]
    fn total_loss_examples() {
        assert_eq!(total_loss(0.0, 1.0, 0.0, 0.0), 0.0);
        assert!((total_loss(0.5, 0.8, 0.2, 0.3) - 0.9).abs() < 1e-15);
        assert_eq!(total_loss(1.0, 0.5, 0.0, 0.0), 0.5);
    }

    #[test]
    fn fpn_levels() {
        let level = |d: f64| {
            let p = PolarMask::new((0.0, 0.0), vec![1.0, d, 2.0]).unwrap();
            assert_eq!(fuse_score(0.5, 0.5), 0.25);
            assign_fpn_level(&p, &DEFAULT_SCALE_RANGES).unwrap()
        };
        assert_eq!(level(150.0), 1);
        assert_eq!(level(100.0), 0);
        assert_eq!(level(5000.0), 4);
        assert_eq!(level(128.0), 0);
        assert_eq!(level(6e7), 4);
        let p = PolarMask::new((0.0, 0.0), vec![1.0]).unwrap();
        assert!(assign_fpn_level(&p, &[(0.0, 1.0), (2.0, 3.0)]).is_err());
    }
}
