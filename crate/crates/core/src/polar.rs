//! Polar mask encoding: a center plus `N` equiangular ray lengths.
//!
//! Ray `i` (0-based) points at angle `(i + 1) * 360 / N` degrees measured with
//! `atan2(dy, dx)` in image coordinates, so angles sweep clockwise on screen.
//! Rays that find no contour support carry the [`SENTINEL`] length and mark a
//! negative sample.

use serde::{Deserialize, Serialize};

use crate::contour::{extract_contours, Contour};
use crate::error::{Error, Result};
use crate::mask::{mass_center, BinaryMask};
use crate::raster::rasterize_polygon;

/// Ray length assigned when no contour point lies near the ray's angle.
pub const SENTINEL: f64 = 1e-6;

pub const DEFAULT_RAY_COUNT: usize = 36;

#[derive(Clone, Debug, PartialEq)]
pub struct PolarMask {
    center: (f64, f64),
    distances: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PolarRecord {
    center: [f64; 2],
    n: usize,
    d: Vec<f64>,
}

impl PolarMask {
    pub fn new(center: (f64, f64), distances: Vec<f64>) -> Result<Self> {
        if distances.is_empty() {
            return Err(Error::invalid("polar mask needs at least one ray"));
        }
        if !center.0.is_finite() || !center.1.is_finite() {
            return Err(Error::invalid("polar center must be finite"));
        }
        if let Some(d) = distances.iter().find(|d| !d.is_finite() || **d < SENTINEL) {
            return Err(Error::invalid(format!(
                "ray length {d} below sentinel minimum"
            )));
        }
        Ok(Self { center, distances })
    }

    pub fn center(&self) -> (f64, f64) {
        self.center
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn ray_count(&self) -> usize {
        self.distances.len()
    }

    /// Angle of ray `index` in degrees, in `(0, 360]`.
    pub fn angle_deg(&self, index: usize) -> f64 {
        ray_angle_deg(index, self.ray_count())
    }

    /// True when every ray carries the sentinel, i.e. a pure negative sample.
    pub fn is_negative(&self) -> bool {
        self.distances.iter().all(|&d| d <= SENTINEL)
    }

    pub fn max_distance(&self) -> f64 {
        self.distances
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Contour vertices `x = cos(θ)·d + x_c`, `y = sin(θ)·d + y_c`.
    pub fn vertices(&self) -> Vec<(f64, f64)> {
        let (xc, yc) = self.center;
        let n = self.ray_count();
        self.distances
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let theta = ray_angle_deg(i, n).to_radians();
                (theta.cos() * d + xc, theta.sin() * d + yc)
            })
            .collect()
    }

    /// One JSON object: `{"center":[x,y],"n":N,"d":[...]}`.
    pub fn to_json_line(&self) -> String {
        let rec = PolarRecord {
            center: [self.center.0, self.center.1],
            n: self.ray_count(),
            d: self.distances.clone(),
        };
        serde_json::to_string(&rec).expect("finite floats serialize")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        let rec: PolarRecord =
            serde_json::from_str(line).map_err(|e| Error::Parse(e.to_string()))?;
        if rec.n != rec.d.len() {
            return Err(Error::Parse(format!(
                "ray count {} does not match {} distances",
                rec.n,
                rec.d.len()
            )));
        }
        Self::new((rec.center[0], rec.center[1]), rec.d)
    }
}

pub fn ray_angle_deg(index: usize, ray_count: usize) -> f64 {
    (index + 1) as f64 * 360.0 / ray_count as f64
}

/// Merge ratio `mu` for joining fragmented contours.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MergeConfig {
    mu: f64,
}

impl MergeConfig {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::invalid(format!(
                "merge ratio must be positive, got {mu}"
            )));
        }
        Ok(Self { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

impl Default for MergeConfig {
    fn default() -> Self {
        Self { mu: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CenterSampleConfig {
    stride: f64,
    grid: usize,
}

impl CenterSampleConfig {
    /// `grid` is the side of the candidate lattice: 3 (9 positives) or 4 (16).
    pub fn new(stride: f64, grid: usize) -> Result<Self> {
        if !(stride > 0.0 && stride.is_finite()) {
            return Err(Error::invalid(format!(
                "stride must be positive, got {stride}"
            )));
        }
        if grid != 3 && grid != 4 {
            return Err(Error::invalid(format!("grid must be 3 or 4, got {grid}")));
        }
        Ok(Self { stride, grid })
    }

    pub fn stride(&self) -> f64 {
        self.stride
    }

    pub fn grid(&self) -> usize {
        self.grid
    }
}

impl Default for CenterSampleConfig {
    fn default() -> Self {
        Self {
            stride: 1.5,
            grid: 3,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Extent {
    x_min: i64,
    x_max: i64,
    y_min: i64,
    y_max: i64,
}

impl Extent {
    fn of(contour: &Contour) -> Self {
        let mut e = Extent {
            x_min: i64::MAX,
            x_max: i64::MIN,
            y_min: i64::MAX,
            y_max: i64::MIN,
        };
        for p in contour.points() {
            e.x_min = e.x_min.min(p.x);
            e.x_max = e.x_max.max(p.x);
            e.y_min = e.y_min.min(p.y);
            e.y_max = e.y_max.max(p.y);
        }
        e
    }

    fn union(self, o: Extent) -> Self {
        Extent {
            x_min: self.x_min.min(o.x_min),
            x_max: self.x_max.max(o.x_max),
            y_min: self.y_min.min(o.y_min),
            y_max: self.y_max.max(o.y_max),
        }
    }

    fn diagonal(&self) -> f64 {
        let w = (self.x_max - self.x_min) as f64;
        let h = (self.y_max - self.y_min) as f64;
        w.hypot(h)
    }
}

/// Diagonal of the joint bounding box of all contour points.
pub fn contour_diameter(contours: &[Contour]) -> Result<f64> {
    let extent = contours
        .iter()
        .map(Extent::of)
        .reduce(Extent::union)
        .ok_or(Error::EmptyContours)?;
    Ok(extent.diagonal())
}

/// Greedy contour merger.
///
/// Starts from the biggest contour and keeps sweeping the input in order,
/// appending any contour whose midpoint lies closer to the running point `p`
/// than `mu * (W(R) + W([c]))`; `p` then moves halfway towards that midpoint.
/// Stops after a sweep that appends nothing. The biggest contour comes first
/// in the result, followed by the others in the order they were appended.
pub fn merge_contours(contours: &[Contour], cfg: &MergeConfig) -> Result<Vec<Contour>> {
    let biggest = contours
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |best, (i, c)| match best {
            Some((_, a)) if a >= c.area() => best,
            _ => Some((i, c.area())),
        })
        .ok_or(Error::EmptyContours)?
        .0;

    let extents: Vec<Extent> = contours.iter().map(Extent::of).collect();
    let midpoints: Vec<(f64, f64)> = contours.iter().map(Contour::midpoint).collect();

    let mut taken = vec![false; contours.len()];
    taken[biggest] = true;
    let mut order = vec![biggest];
    let mut merged_extent = extents[biggest];
    let mut p = midpoints[biggest];

    loop {
        let mut added = false;
        for i in 0..contours.len() {
            if taken[i] {
                continue;
            }
            let pi = midpoints[i];
            let dist = (p.0 - pi.0).hypot(p.1 - pi.1);
            let threshold = cfg.mu * (merged_extent.diagonal() + extents[i].diagonal());
            if dist < threshold {
                taken[i] = true;
                order.push(i);
                merged_extent = merged_extent.union(extents[i]);
                p = ((p.0 + pi.0) / 2.0, (p.1 + pi.1) / 2.0);
                added = true;
            }
        }
        if !added {
            break;
        }
    }
    Ok(order.into_iter().map(|i| contours[i].clone()).collect())
}

fn angle_from(center: (f64, f64), p: (f64, f64)) -> f64 {
    let a = (p.1 - center.1).atan2(p.0 - center.0).to_degrees();
    if a <= 0.0 {
        a + 360.0
    } else {
        a
    }
}

/// Signed angular difference `b - a` wrapped to `(-180, 180]`.
fn wrap_deg(d: f64) -> f64 {
    let mut d = d % 360.0;
    if d > 180.0 {
        d -= 360.0;
    } else if d <= -180.0 {
        d += 360.0;
    }
    d
}

fn cross(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

/// Distances along the ray from `center` at `theta_deg` to every crossing
/// with segment `a -> b`; a collinear overlap yields its far end.
fn ray_segment_hits(
    center: (f64, f64),
    dir: (f64, f64),
    a: (f64, f64),
    b: (f64, f64),
    out: &mut Vec<f64>,
) {
    const EPS: f64 = 1e-9;
    let ac = (a.0 - center.0, a.1 - center.1);
    let bc = (b.0 - center.0, b.1 - center.1);
    let seg = (b.0 - a.0, b.1 - a.1);
    let denom = cross(dir, seg);
    let scale = 1.0 + seg.0.abs() + seg.1.abs();
    if denom.abs() <= EPS * scale {
        // Parallel: only a collinear segment touches the ray.
        if cross(ac, dir).abs() <= EPS * (1.0 + ac.0.abs() + ac.1.abs()) {
            for p in [ac, bc] {
                let t = p.0 * dir.0 + p.1 * dir.1;
                if t >= 0.0 {
                    out.push(t);
                }
            }
        }
        return;
    }
    let t = cross(ac, seg) / denom;
    let s = cross(ac, dir) / denom;
    if t >= 0.0 && (-EPS..=1.0 + EPS).contains(&s) {
        out.push(t);
    }
}

/// Largest crossing distance of each ray with the closed contours, `None`
/// where a ray misses every contour.
pub fn cast_rays(contours: &[Contour], center: (f64, f64), ray_count: usize) -> Vec<Option<f64>> {
    let polylines: Vec<Vec<(f64, f64)>> = contours.iter().map(Contour::to_f64).collect();
    let mut hits = Vec::new();
    (0..ray_count)
        .map(|i| {
            let theta = ray_angle_deg(i, ray_count).to_radians();
            let dir = (theta.cos(), theta.sin());
            hits.clear();
            for pts in &polylines {
                if pts.len() == 1 {
                    ray_segment_hits(center, dir, pts[0], pts[0], &mut hits);
                    continue;
                }
                for k in 0..pts.len() {
                    ray_segment_hits(center, dir, pts[k], pts[(k + 1) % pts.len()], &mut hits);
                }
            }
            hits.iter().copied().reduce(f64::max)
        })
        .collect()
}

/// Farthest contour vertex within `delta_deg` of `theta_deg`, if any.
fn nearest_angle_fallback(polar: &[(f64, f64)], theta_deg: f64, delta_deg: f64) -> Option<f64> {
    polar
        .iter()
        .filter(|(a, _)| wrap_deg(a - theta_deg).abs() <= delta_deg)
        .map(|&(_, d)| d)
        .reduce(f64::max)
}

/// Distance labels for an already-merged contour set.
///
/// Each ray takes its farthest crossing with the closed contours. A ray that
/// crosses nothing falls back to the farthest contour vertex within half a ray
/// spacing of its angle, and otherwise gets [`SENTINEL`].
pub fn encode_contours(
    contours: &[Contour],
    center: (f64, f64),
    ray_count: usize,
) -> Result<PolarMask> {
    if ray_count == 0 {
        return Err(Error::invalid("ray count must be positive"));
    }
    if contours.is_empty() {
        return Err(Error::EmptyContours);
    }
    let delta = 180.0 / ray_count as f64;
    let polar: Vec<(f64, f64)> = contours
        .iter()
        .flat_map(|c| c.to_f64())
        .filter_map(|p| {
            let d = (p.0 - center.0).hypot(p.1 - center.1);
            (d > 0.0).then(|| (angle_from(center, p), d))
        })
        .collect();
    let distances = cast_rays(contours, center, ray_count)
        .into_iter()
        .enumerate()
        .map(|(i, hit)| {
            hit.or_else(|| nearest_angle_fallback(&polar, ray_angle_deg(i, ray_count), delta))
                .map_or(SENTINEL, |d| d.max(SENTINEL))
        })
        .collect();
    PolarMask::new(center, distances)
}

/// Encodes a mask as a polar mask around `center`: extract contours, merge
/// fragments, then cast `ray_count` rays.
pub fn encode(
    mask: &BinaryMask,
    center: (f64, f64),
    ray_count: usize,
    cfg: &MergeConfig,
) -> Result<PolarMask> {
    let (cx, cy) = center;
    if !(cx >= 0.0
        && cy >= 0.0
        && cx <= (mask.width() - 1) as f64
        && cy <= (mask.height() - 1) as f64)
    {
        return Err(Error::invalid(format!(
            "center ({cx}, {cy}) outside {}x{} raster",
            mask.width(),
            mask.height()
        )));
    }
    let contours = extract_contours(mask);
    if contours.is_empty() {
        return Err(Error::EmptyMask);
    }
    let merged = merge_contours(&contours, cfg)?;
    encode_contours(&merged, center, ray_count)
}

/// [`encode`] around the mask's mass center.
pub fn encode_at_mass_center(
    mask: &BinaryMask,
    ray_count: usize,
    cfg: &MergeConfig,
) -> Result<PolarMask> {
    let center = mass_center(mask)?;
    encode(mask, center, ray_count, cfg)
}

/// Assembles the ray endpoints into a polygon and fills it.
///
/// Sentinel rays put their vertex at the center; with fewer than three rays
/// the result is empty.
pub fn decode(polar: &PolarMask, width: usize, height: usize) -> Result<BinaryMask> {
    if polar.ray_count() < 3 {
        return BinaryMask::new(width, height);
    }
    rasterize_polygon(&polar.vertices(), width, height)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CenterCandidate {
    pub x: f64,
    pub y: f64,
    pub positive: bool,
}

/// `grid x grid` lattice spaced `cell` pixels apart around the mass center,
/// in row-major order. Positives lie within Chebyshev distance
/// `stride * cell` of the mass center.
pub fn sample_center_candidates(
    mask: &BinaryMask,
    cfg: &CenterSampleConfig,
    cell: f64,
) -> Result<Vec<CenterCandidate>> {
    if !(cell > 0.0 && cell.is_finite()) {
        return Err(Error::invalid(format!("cell must be positive, got {cell}")));
    }
    let (mx, my) = mass_center(mask)?;
    let half = (cfg.grid - 1) as f64 / 2.0;
    let radius = cfg.stride * cell;
    let offsets: Vec<f64> = (0..cfg.grid).map(|i| (i as f64 - half) * cell).collect();
    let mut out = Vec::with_capacity(cfg.grid * cfg.grid);
    for &oy in &offsets {
        for &ox in &offsets {
            out.push(CenterCandidate {
                x: mx + ox,
                y: my + oy,
                positive: ox.abs().max(oy.abs()) <= radius + 1e-9 * cell,
            });
        }
    }
    Ok(out)
}
