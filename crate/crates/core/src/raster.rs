//! Even-odd scanline polygon fill sampled at pixel centers.

use crate::error::{Error, Result};
use crate::mask::BinaryMask;

/// Fills a closed polygon into a `width` x `height` raster.
///
/// A pixel is set iff its center `(x, y)` is inside under the even-odd rule
/// with half-open edge crossings; parts outside the raster are clipped.
/// Zero-area polygons give an all-false mask.
pub fn rasterize_polygon(points: &[(f64, f64)], width: usize, height: usize) -> Result<BinaryMask> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "polygon needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::invalid("polygon has non-finite vertex"));
    }
    let mut mask = BinaryMask::new(width, height)?;

    let (y_lo, y_hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| {
            (lo.min(y), hi.max(y))
        });
    let row_start = y_lo.ceil().max(0.0) as usize;
    let row_end = (y_hi.floor().max(-1.0) + 1.0).min(height as f64) as usize;

    let n = points.len();
    let mut xs: Vec<f64> = Vec::with_capacity(n);
    for y in row_start..row_end {
        let py = y as f64;
        xs.clear();
        for i in 0..n {
            let (ax, ay) = points[i];
            let (bx, by) = points[(i + 1) % n];
            if (ay > py) != (by > py) {
                xs.push((bx - ax) * (py - ay) / (by - ay) + ax);
            }
        }
        xs.sort_by(f64::total_cmp);
        for span in xs.chunks_exact(2) {
            let lo = span[0].ceil().max(0.0);
            let hi = span[1].ceil().min(width as f64);
            if hi <= lo {
                continue;
            }
            for x in lo as usize..hi as usize {
                mask.set(x, y, true);
            }
        }
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Crossing-number test at a single point; same half-open convention.
    fn inside(poly: &[(f64, f64)], px: f64, py: f64) -> bool {
        let mut c = false;
        for i in 0..poly.len() {
            let (ax, ay) = poly[i];
            let (bx, by) = poly[(i + 1) % poly.len()];
            if (ay > py) != (by > py) && px < (bx - ax) * (py - ay) / (by - ay) + ax {
                c = !c;
            }
        }
        c
    }

    #[test]
    fn square_fills_center_block() {
        let sq = [(0.5, 0.5), (3.5, 0.5), (3.5, 3.5), (0.5, 3.5)];
        let m = rasterize_polygon(&sq, 5, 5).unwrap();
        let expected =
            BinaryMask::from_fn(5, 5, |x, y| (1..=3).contains(&x) && (1..=3).contains(&y)).unwrap();
        assert_eq!(m, expected);
    }

    #[test]
    fn outside_polygon_is_clipped() {
        let far = [(-20.0, -20.0), (-10.0, -20.0), (-10.0, -10.0)];
        assert!(rasterize_polygon(&far, 5, 5).unwrap().is_empty());
        let right = [(10.0, 0.0), (20.0, 0.0), (20.0, 4.0)];
        assert!(rasterize_polygon(&right, 5, 5).unwrap().is_empty());
    }

    #[test]
    fn triangle_matches_point_oracle() {
        let tri = [(0.0, 0.0), (4.0, 0.0), (0.0, 4.0)];
        let m = rasterize_polygon(&tri, 5, 5).unwrap();
        for y in 0..5 {
            for x in 0..5 {
                assert_eq!(
                    m.get(x, y),
                    inside(&tri, x as f64, y as f64),
                    "pixel ({x},{y})"
                );
            }
        }
        assert!(m.count() > 0);
    }

    #[test]
    fn degenerate_polygon_is_empty() {
        let line = [(0.0, 0.0), (2.0, 2.0), (4.0, 4.0)];
        assert!(rasterize_polygon(&line, 5, 5).unwrap().is_empty());
        let point = [(2.0, 2.0); 4];
        assert!(rasterize_polygon(&point, 5, 5).unwrap().is_empty());
    }

    #[test]
    fn too_few_points_is_error() {
        assert!(rasterize_polygon(&[(0.0, 0.0), (1.0, 1.0)], 3, 3).is_err());
    }
}
