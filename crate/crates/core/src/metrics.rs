//! Video object segmentation metrics: region similarity (J), contour
//! accuracy (F), average pixel error (APE) and their temporal aggregates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::BinaryMask;

/// Threshold above which a frame counts towards recall.
pub const RECALL_THRESHOLD: f64 = 0.5;

pub const DEFAULT_CONTOUR_TOL: f64 = 1.0;

/// `|M ∩ G| / |M ∪ G|`, with two empty masks scoring 1.
pub fn jaccard(m: &BinaryMask, g: &BinaryMask) -> Result<f64> {
    m.iou(g)
}

/// Foreground pixels with a 4-neighbor in the background or off the raster.
pub fn boundary_pixels(mask: &BinaryMask) -> Vec<(usize, usize)> {
    mask.foreground()
        .filter(|&(x, y)| {
            let (x, y) = (x as i64, y as i64);
            !(mask.get_signed(x - 1, y)
                && mask.get_signed(x + 1, y)
                && mask.get_signed(x, y - 1)
                && mask.get_signed(x, y + 1))
        })
        .collect()
}

/// Fraction of `from` points within Euclidean `tol` of some point marked in `target`.
fn matched_fraction(from: &[(usize, usize)], target: &BinaryMask, tol: f64) -> f64 {
    let r = tol.floor() as i64;
    let tol2 = tol * tol;
    let hits = from
        .iter()
        .filter(|&&(x, y)| {
            (-r..=r).any(|dy| {
                (-r..=r).any(|dx| {
                    ((dx * dx + dy * dy) as f64) <= tol2
                        && target.get_signed(x as i64 + dx, y as i64 + dy)
                })
            })
        })
        .count();
    hits as f64 / from.len() as f64
}

/// Boundary F-measure between the contours of `m` and `g`.
///
/// Contour points are [`boundary_pixels`]; a point matches when a point of
/// the other contour lies within `tol` pixels.
pub fn contour_f(m: &BinaryMask, g: &BinaryMask, tol: f64) -> Result<f64> {
    if m.dims() != g.dims() {
        return Err(Error::DimensionMismatch {
            left: m.dims(),
            right: g.dims(),
        });
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::invalid(format!(
            "tolerance must be non-negative, got {tol}"
        )));
    }
    let bm = boundary_pixels(m);
    let bg = boundary_pixels(g);
    match (bm.is_empty(), bg.is_empty()) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    let (w, h) = m.dims();
    let mut cm = BinaryMask::new(w, h)?;
    let mut cg = BinaryMask::new(w, h)?;
    bm.iter().for_each(|&(x, y)| cm.set(x, y, true));
    bg.iter().for_each(|&(x, y)| cg.set(x, y, true));

    let precision = matched_fraction(&bm, &cg, tol);
    let recall = matched_fraction(&bg, &cm, tol);
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApeMode {
    /// `|M \ G|`: predicted pixels outside the ground truth.
    #[default]
    OneSided,
    /// `|M △ G|`: also counts ground-truth pixels the prediction misses.
    Symmetric,
}

/// Mean per-frame pixel error.
pub fn ape(ms: &[BinaryMask], gs: &[BinaryMask], mode: ApeMode) -> Result<f64> {
    if ms.len() != gs.len() {
        return Err(Error::LengthMismatch {
            left: ms.len(),
            right: gs.len(),
        });
    }
    if ms.is_empty() {
        return Err(Error::invalid("no frames"));
    }
    let mut total = 0usize;
    for (m, g) in ms.iter().zip(gs) {
        total += frame_pixel_error(m, g, mode)?;
    }
    Ok(total as f64 / ms.len() as f64)
}

pub fn frame_pixel_error(m: &BinaryMask, g: &BinaryMask, mode: ApeMode) -> Result<usize> {
    Ok(match mode {
        ApeMode::OneSided => m.difference_count(g)?,
        ApeMode::Symmetric => m.difference_count(g)? + g.difference_count(m)?,
    })
}

/// Mean, recall and decay of a per-frame series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub mean: f64,
    pub recall: f64,
    pub decay: f64,
}

/// Aggregates a series given in temporal order.
///
/// Decay is the mean of the first `ceil(n/4)` frames minus the mean of the
/// last `ceil(n/4)` frames, so a positive decay means quality dropped over time.
pub fn aggregate(values: &[f64]) -> Result<AggregateStats> {
    if values.is_empty() {
        return Err(Error::invalid("cannot aggregate an empty series"));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let recall = values.iter().filter(|&&v| v > RECALL_THRESHOLD).count() as f64 / n as f64;
    let q = n.div_ceil(4);
    let head = values[..q].iter().sum::<f64>() / q as f64;
    let tail = values[n - q..].iter().sum::<f64>() / q as f64;
    Ok(AggregateStats {
        mean,
        recall,
        decay: head - tail,
    })
}

/// Sorts `values` by `frame_times` (stable) before aggregating.
pub fn aggregate_by_time(values: &[f64], frame_times: &[u64]) -> Result<AggregateStats> {
    if values.len() != frame_times.len() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: frame_times.len(),
        });
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by_key(|&i| frame_times[i]);
    let ordered: Vec<f64> = idx.into_iter().map(|i| values[i]).collect();
    aggregate(&ordered)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(w: usize, h: usize, x0: usize, y0: usize, bw: usize, bh: usize) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| {
            x >= x0 && x < x0 + bw && y >= y0 && y < y0 + bh
        })
        .unwrap()
    }

    #[test]
    fn jaccard_examples() {
        let a = block(6, 6, 1, 1, 2, 2);
        assert_eq!(jaccard(&a, &a).unwrap(), 1.0);
        assert_eq!(jaccard(&a, &block(6, 6, 4, 4, 2, 2)).unwrap(), 0.0);
        assert_eq!(jaccard(&a, &block(6, 6, 2, 1, 2, 2)).unwrap(), 2.0 / 6.0);
        let e = BinaryMask::new(6, 6).unwrap();
        assert_eq!(jaccard(&e, &e).unwrap(), 1.0);
        assert!(jaccard(&a, &BinaryMask::new(5, 6).unwrap()).is_err());
    }

    #[test]
    fn contour_f_examples() {
        let sq = block(12, 12, 4, 4, 4, 4);
        // One step of 4-neighbor dilation: the square plus a one-pixel rim without corners.
        let dilated = BinaryMask::from_fn(12, 12, |x, y| {
            let inside = |x: usize, y: usize| (4..8).contains(&x) && (4..8).contains(&y);
            inside(x, y)
                || (x > 0 && inside(x - 1, y))
                || inside(x + 1, y)
                || (y > 0 && inside(x, y - 1))
                || inside(x, y + 1)
        })
        .unwrap();
        assert_eq!(contour_f(&sq, &sq, 0.0).unwrap(), 1.0);
        assert_eq!(contour_f(&sq, &dilated, 1.0).unwrap(), 1.0);
        assert!(contour_f(&sq, &dilated, 0.0).unwrap() < 1.0);
        let e = BinaryMask::new(12, 12).unwrap();
        assert_eq!(contour_f(&e, &sq, 1.0).unwrap(), 0.0);
        assert_eq!(contour_f(&e, &e, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn ape_examples() {
        let g = block(8, 8, 0, 0, 4, 4);
        assert_eq!(
            ape(
                std::slice::from_ref(&g),
                std::slice::from_ref(&g),
                ApeMode::OneSided
            )
            .unwrap(),
            0.0
        );
        let m = block(8, 8, 0, 0, 5, 2);
        let empty = BinaryMask::new(8, 8).unwrap();
        assert_eq!(
            ape(
                std::slice::from_ref(&m),
                std::slice::from_ref(&empty),
                ApeMode::OneSided
            )
            .unwrap(),
            10.0
        );
        let inner = block(8, 8, 1, 1, 2, 2);
        assert_eq!(
            ape(
                std::slice::from_ref(&inner),
                std::slice::from_ref(&g),
                ApeMode::OneSided
            )
            .unwrap(),
            0.0
        );
        assert_eq!(
            ape(&[inner], std::slice::from_ref(&g), ApeMode::Symmetric).unwrap(),
            12.0
        );
        assert!(ape(std::slice::from_ref(&g), &[], ApeMode::OneSided).is_err());
    }

    #[test]
    fn aggregate_examples() {
        let s = aggregate(&[0.7; 5]).unwrap();
        assert_eq!(s.decay, 0.0);
        let s = aggregate(&[0.9, 0.9, 0.1, 0.1]).unwrap();
        assert!((s.mean - 0.5).abs() < 1e-15);
        assert_eq!(s.recall, 0.5);
        assert!((s.decay - 0.8).abs() < 1e-15);
        assert_eq!(aggregate(&[0.6, 0.6, 0.6]).unwrap().recall, 1.0);
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn aggregate_by_time_sorts() {
        let s = aggregate_by_time(&[0.1, 0.9, 0.1, 0.9], &[3, 0, 2, 1]).unwrap();
        assert!((s.decay - 0.8).abs() < 1e-15);
    }
}
