//! Synthetic star-convex shapes for fixtures and representation studies.

use crate::error::Result;
use crate::mask::BinaryMask;

/// Radial profile `r(φ) = base · (1 + Σ amp_k · cos(k·φ + phase_k))` around
/// `center`. Every boundary point is visible from the center as long as the
/// profile stays positive.
#[derive(Clone, Debug, PartialEq)]
pub struct StarShape {
    pub center: (f64, f64),
    pub base: f64,
    /// `(frequency, amplitude, phase)` triples.
    pub harmonics: Vec<(u32, f64, f64)>,
}

impl StarShape {
    pub fn disc(center: (f64, f64), radius: f64) -> Self {
        Self {
            center,
            base: radius,
            harmonics: Vec::new(),
        }
    }

    pub fn radius_at(&self, phi: f64) -> f64 {
        let wobble: f64 = self
            .harmonics
            .iter()
            .map(|&(k, amp, phase)| amp * (k as f64 * phi + phase).cos())
            .sum();
        self.base * (1.0 + wobble)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let dx = x - self.center.0;
        let dy = y - self.center.1;
        let r = dx.hypot(dy);
        r <= self.radius_at(dy.atan2(dx))
    }

    /// Pixels whose centers fall inside the shape.
    pub fn rasterize(&self, width: usize, height: usize) -> Result<BinaryMask> {
        BinaryMask::from_fn(width, height, |x, y| self.contains(x as f64, y as f64))
    }
}
