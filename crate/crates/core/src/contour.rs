//! Outer-border extraction for 8-connected foreground components.

use std::collections::VecDeque;

use crate::mask::BinaryMask;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }
}

/// Closed polyline; the last point connects back to the first.
///
/// `area` ranks contours when picking the biggest one. Contours traced from a
/// mask carry the pixel count of their component, contours built from raw
/// points carry the shoelace area of the polygon.
#[derive(Clone, Debug, PartialEq)]
pub struct Contour {
    points: Vec<Point>,
    area: f64,
}

impl Contour {
    /// Builds a contour from explicit vertices; returns `None` when empty.
    pub fn from_points(points: Vec<Point>) -> Option<Self> {
        if points.is_empty() {
            return None;
        }
        let area = shoelace_area(&points);
        Some(Self { points, area })
    }

    pub fn with_area(points: Vec<Point>, area: f64) -> Option<Self> {
        (!points.is_empty()).then_some(Self { points, area })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Centroid of the vertex list.
    pub fn midpoint(&self) -> (f64, f64) {
        let n = self.points.len() as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x as f64, sy + p.y as f64));
        (sx / n, sy / n)
    }

    /// Vertices as real coordinates, ready for rasterization.
    pub fn to_f64(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.x as f64, p.y as f64))
            .collect()
    }
}

fn shoelace_area(points: &[Point]) -> f64 {
    let n = points.len();
    let twice: i64 = (0..n)
        .map(|i| {
            let a = points[i];
            let b = points[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum();
    (twice as f64 / 2.0).abs()
}

// Clockwise on screen (y down), starting west.
const DIRS: [(i64, i64); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

fn dir_index(from: Point, to: Point) -> usize {
    let d = (to.x - from.x, to.y - from.y);
    DIRS.iter()
        .position(|&v| v == d)
        .expect("points are 8-neighbors")
}

fn step(p: Point, dir: usize) -> Point {
    let (dx, dy) = DIRS[dir];
    Point::new(p.x + dx, p.y + dy)
}

/// Follows the outer border of the component containing `start`, which must
/// be the component's first pixel in raster order (so its west neighbor is
/// background).
fn trace_outer(mask: &BinaryMask, start: Point) -> Vec<Point> {
    let fg = |p: Point| mask.get_signed(p.x, p.y);

    let Some(first) = (0..8).map(|k| step(start, k)).find(|&p| fg(p)) else {
        return vec![start];
    };

    let mut points = Vec::new();
    let mut prev = first;
    let mut cur = start;
    loop {
        points.push(cur);
        let back = dir_index(cur, prev);
        let next = (1..=8)
            .map(|k| step(cur, (back + 8 - k) % 8))
            .find(|&p| fg(p))
            .expect("component has at least two pixels");
        if next == start && cur == first {
            break;
        }
        prev = cur;
        cur = next;
    }
    points
}

struct Component {
    start: Point,
    pixels: usize,
    x_min: i64,
}

fn label_components(mask: &BinaryMask) -> Vec<Component> {
    let (w, h) = mask.dims();
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();

    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) || seen[y * w + x] {
                continue;
            }
            seen[y * w + x] = true;
            queue.push_back((x, y));
            let mut pixels = 0;
            let mut x_min = x;
            while let Some((cx, cy)) = queue.pop_front() {
                pixels += 1;
                x_min = x_min.min(cx);
                for (dx, dy) in DIRS {
                    let nx = cx as i64 + dx;
                    let ny = cy as i64 + dy;
                    if !mask.get_signed(nx, ny) {
                        continue;
                    }
                    let idx = ny as usize * w + nx as usize;
                    if !seen[idx] {
                        seen[idx] = true;
                        queue.push_back((nx as usize, ny as usize));
                    }
                }
            }
            out.push(Component {
                start: Point::new(x as i64, y as i64),
                pixels,
                x_min: x_min as i64,
            });
        }
    }
    out
}

/// One outer contour per 8-connected component, biggest component first.
///
/// Ties on pixel count are broken by the component's top row, then its
/// leftmost column. Hole borders are never emitted.
pub fn extract_contours(mask: &BinaryMask) -> Vec<Contour> {
    let mut comps = label_components(mask);
    comps.sort_by(|a, b| {
        b.pixels
            .cmp(&a.pixels)
            .then(a.start.y.cmp(&b.start.y))
            .then(a.x_min.cmp(&b.x_min))
    });
    comps
        .into_iter()
        .map(|c| Contour {
            points: trace_outer(mask, c.start),
            area: c.pixels as f64,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn square(w: usize, h: usize, x0: usize, y0: usize, side: usize) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| {
            x >= x0 && x < x0 + side && y >= y0 && y < y0 + side
        })
        .unwrap()
    }

    #[test]
    fn centered_square_has_eight_boundary_pixels() {
        let mask = square(5, 5, 1, 1, 3);
        let contours = extract_contours(&mask);
        assert_eq!(contours.len(), 1);
        let pts: HashSet<Point> = contours[0].points().iter().copied().collect();
        let expected: HashSet<Point> = [
            (1, 1),
            (2, 1),
            (3, 1),
            (3, 2),
            (3, 3),
            (2, 3),
            (1, 3),
            (1, 2),
        ]
        .into_iter()
        .map(|(x, y)| Point::new(x, y))
        .collect();
        assert_eq!(contours[0].len(), 8);
        assert_eq!(pts, expected);
        assert_eq!(contours[0].area(), 9.0);
    }

    #[test]
    fn empty_mask_has_no_contours() {
        assert!(extract_contours(&BinaryMask::new(4, 4).unwrap()).is_empty());
    }

    #[test]
    fn single_pixel_and_pair() {
        let one = BinaryMask::from_pixels(3, 3, &[(1, 1)]).unwrap();
        assert_eq!(extract_contours(&one)[0].points(), &[Point::new(1, 1)]);
        let two = BinaryMask::from_pixels(3, 1, &[(0, 0), (1, 0)]).unwrap();
        assert_eq!(
            extract_contours(&two)[0].points(),
            &[Point::new(0, 0), Point::new(1, 0)]
        );
    }

    #[test]
    fn holes_are_not_emitted() {
        let ring = BinaryMask::from_fn(7, 7, |x, y| {
            (1..=5).contains(&x) && (1..=5).contains(&y) && !(x == 3 && y == 3)
        })
        .unwrap();
        let contours = extract_contours(&ring);
        assert_eq!(contours.len(), 1);
        assert_eq!(contours[0].len(), 16);
    }

    #[test]
    fn consecutive_points_are_neighbors() {
        let mask = BinaryMask::from_fn(12, 12, |x, y| {
            let (x, y) = (x as i64, y as i64);
            (x - 5) * (x - 5) + (y - 6) * (y - 6) <= 16 || (x == 10 && y < 4) || (x >= 9 && y == 3)
        })
        .unwrap();
        for c in extract_contours(&mask) {
            let n = c.len();
            for i in 0..n {
                let a = c.points()[i];
                let b = c.points()[(i + 1) % n];
                assert!(
                    (a.x - b.x).abs() <= 1 && (a.y - b.y).abs() <= 1,
                    "{a:?} {b:?}"
                );
            }
        }
    }

    #[test]
    fn midpoint_is_vertex_centroid() {
        let c = Contour::from_points(vec![
            Point::new(0, 0),
            Point::new(4, 0),
            Point::new(4, 2),
            Point::new(0, 2),
        ])
        .unwrap();
        assert_eq!(c.midpoint(), (2.0, 1.0));
        assert_eq!(c.area(), 8.0);
    }
}
