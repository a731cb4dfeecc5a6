//! Parameter-free neck operators on dense feature maps.
//!
//! Feature maps are `height x width x channels`, stored row-major with the
//! channel index fastest. All correlations are valid-mode (no padding).
//! Up-channel correlation is not provided: it needs learned weights.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::ShapeMismatch(format!(
                "feature map dims must be positive, got {height}x{width}x{channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(Error::LengthMismatch {
                left: data.len(),
                right: height * width * channels,
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature map values must be finite"));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Result<Self> {
        Self::new(
            height,
            width,
            channels,
            vec![0.0; height * width * channels],
        )
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(y, x, c));
                }
            }
        }
        Self::new(height, width, channels, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Single channel `c` as its own map.
    pub fn channel(&self, c: usize) -> Result<FeatureMap> {
        if c >= self.channels {
            return Err(Error::ShapeMismatch(format!(
                "channel {c} out of {}",
                self.channels
            )));
        }
        Self::from_fn(self.height, self.width, 1, |y, x, _| self.get(y, x, c))
    }

    /// `alpha * self + beta * other` for equal shapes.
    pub fn axpby(&self, alpha: f64, other: &FeatureMap, beta: f64) -> Result<FeatureMap> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        FeatureMap::new(self.height, self.width, self.channels, data)
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    /// Parses `h w c` on the first line followed by whitespace-separated values.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing dims line".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::Parse(format!("bad dim {t:?}")))
            })
            .collect::<Result<_>>()?;
        let [h, w, c] = dims[..] else {
            return Err(Error::Parse(format!("expected 3 dims, got {}", dims.len())));
        };
        let data = lines
            .flat_map(str::split_whitespace)
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad value {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(h, w, c, data)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.height, self.width, self.channels);
        for row in self.data.chunks(self.width * self.channels) {
            let vals: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&vals.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Fusion coefficients for the correlation and semi-FPN blends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FusionWeights {
    pub alpha: f64,
    pub beta: f64,
}

impl FusionWeights {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::invalid("fusion weights must be finite"));
        }
        Ok(Self { alpha, beta })
    }
}

impl Default for FusionWeights {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
        }
    }
}

fn check_window(search: &FeatureMap, template: &FeatureMap) -> Result<(usize, usize)> {
    if template.channels != search.channels {
        return Err(Error::ShapeMismatch(format!(
            "channel mismatch: search {} vs template {}",
            search.channels, template.channels
        )));
    }
    if template.height > search.height || template.width > search.width {
        return Err(Error::ShapeMismatch(format!(
            "template {}x{} larger than search {}x{}",
            template.height, template.width, search.height, search.width
        )));
    }
    Ok((
        search.height - template.height + 1,
        search.width - template.width + 1,
    ))
}

/// Sliding-window correlation summed over channels; one output channel.
pub fn cross_correlate(search: &FeatureMap, template: &FeatureMap) -> Result<FeatureMap> {
    let (oh, ow) = check_window(search, template)?;
    let c = search.channels;
    let row_len = template.width * c;
    FeatureMap::from_fn(oh, ow, 1, |oy, ox, _| {
        let mut acc = 0.0;
        for ty in 0..template.height {
            let s0 = ((oy + ty) * search.width + ox) * c;
            let t0 = ty * row_len;
            acc += search.data[s0..s0 + row_len]
                .iter()
                .zip(&template.data[t0..t0 + row_len])
                .map(|(s, t)| s * t)
                .sum::<f64>();
        }
        acc
    })
}

/// Per-channel correlation; keeps the channel count.
pub fn depthwise_cross_correlate(search: &FeatureMap, template: &FeatureMap) -> Result<FeatureMap> {
    let (oh, ow) = check_window(search, template)?;
    FeatureMap::from_fn(oh, ow, search.channels, |oy, ox, ch| {
        let mut acc = 0.0;
        for ty in 0..template.height {
            for tx in 0..template.width {
                acc += search.get(oy + ty, ox + tx, ch) * template.get(ty, tx, ch);
            }
        }
        acc
    })
}

/// Center crop to `h x w`, offsets `floor((dim - out) / 2)`.
pub fn center_crop(map: &FeatureMap, h: usize, w: usize) -> Result<FeatureMap> {
    if h > map.height || w > map.width || h == 0 || w == 0 {
        return Err(Error::ShapeMismatch(format!(
            "cannot crop {}x{} to {h}x{w}",
            map.height, map.width
        )));
    }
    let oy = (map.height - h) / 2;
    let ox = (map.width - w) / 2;
    FeatureMap::from_fn(h, w, map.channels, |y, x, c| map.get(y + oy, x + ox, c))
}

/// Single-channel similarity repeated across all `C` channels and blended
/// with the center-cropped search features: `alpha * repeat(s) + beta * crop(x)`.
pub fn repeated_cross_correlate(
    search: &FeatureMap,
    template: &FeatureMap,
    w: &FusionWeights,
) -> Result<FeatureMap> {
    let sim = cross_correlate(search, template)?;
    let cropped = center_crop(search, sim.height, sim.width)?;
    FeatureMap::from_fn(sim.height, sim.width, search.channels, |y, x, c| {
        w.alpha * sim.get(y, x, 0) + w.beta * cropped.get(y, x, c)
    })
}

fn bilinear_taps(out: usize, input: usize) -> Vec<(usize, usize, f64)> {
    let scale = input as f64 / out as f64;
    (0..out)
        .map(|i| {
            let src = ((i as f64 + 0.5) * scale - 0.5).max(0.0);
            let i0 = (src.floor() as usize).min(input - 1);
            let i1 = (i0 + 1).min(input - 1);
            (i0, i1, src - i0 as f64)
        })
        .collect()
}

/// Bilinear resize with half-pixel centers (align-corners off).
pub fn bilinear_resize(map: &FeatureMap, height: usize, width: usize) -> Result<FeatureMap> {
    if height == 0 || width == 0 {
        return Err(Error::ShapeMismatch(
            "resize target must be positive".into(),
        ));
    }
    let ys = bilinear_taps(height, map.height);
    let xs = bilinear_taps(width, map.width);
    FeatureMap::from_fn(height, width, map.channels, |y, x, c| {
        let (y0, y1, fy) = ys[y];
        let (x0, x1, fx) = xs[x];
        let top = map.get(y0, x0, c) * (1.0 - fx) + map.get(y0, x1, c) * fx;
        let bottom = map.get(y1, x0, c) * (1.0 - fx) + map.get(y1, x1, c) * fx;
        top * (1.0 - fy) + bottom * fy
    })
}

/// Feature-pyramid merge without the post-fusion convolution: upsample
/// `upper` to `lateral`'s size and return `alpha * up + beta * lateral`.
pub fn semi_fpn_fuse(
    upper: &FeatureMap,
    lateral: &FeatureMap,
    w: &FusionWeights,
) -> Result<FeatureMap> {
    if upper.channels != lateral.channels {
        return Err(Error::ShapeMismatch(format!(
            "channel mismatch: upper {} vs lateral {}",
            upper.channels, lateral.channels
        )));
    }
    if upper.height > lateral.height || upper.width > lateral.width {
        return Err(Error::ShapeMismatch(format!(
            "upper {}x{} larger than lateral {}x{}",
            upper.height, upper.width, lateral.height, lateral.width
        )));
    }
    let up = bilinear_resize(upper, lateral.height, lateral.width)?;
    up.axpby(w.alpha, lateral, w.beta)
}
