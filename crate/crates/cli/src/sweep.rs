//! Representation upper-bound sweeps over the merge ratio or the ray count.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use polarvos_core::{LabelMap, MergeConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::DatasetIndex;
use crate::error::{CliError, Result};
use crate::labels::{round_trip, write_file};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Mu,
    Rays,
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mu" => Ok(SweepParam::Mu),
            "rays" => Ok(SweepParam::Rays),
            other => Err(format!(
                "unknown sweep parameter '{other}' (expected mu or rays)"
            )),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Mu => "mu",
            SweepParam::Rays => "rays",
        })
    }
}

/// One sweep axis; the other parameter stays at its fixed value.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    param: SweepParam,
    values: Vec<f64>,
    rays: usize,
    mu: f64,
}

impl SweepSpec {
    pub fn new(param: SweepParam, values: Vec<f64>, rays: usize, mu: f64) -> Result<Self> {
        let bad = |msg: String| Err(CliError::Validation(msg));
        if values.is_empty() {
            return bad("sweep needs at least one value".into());
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return bad(format!("merge ratio must be positive, got {mu}"));
        }
        if rays < 3 {
            return bad(format!("ray count must be at least 3, got {rays}"));
        }
        for &v in &values {
            let ok = match param {
                SweepParam::Mu => v > 0.0 && v.is_finite(),
                SweepParam::Rays => v >= 3.0 && v.fract() == 0.0 && v <= u32::MAX as f64,
            };
            if !ok {
                return bad(format!("invalid {param} value {v}"));
            }
        }
        Ok(Self {
            param,
            values,
            rays,
            mu,
        })
    }

    pub fn param(&self) -> SweepParam {
        self.param
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(ray count, merge config)` for one sweep value.
    fn settings(&self, v: f64) -> (usize, MergeConfig) {
        let (rays, mu) = match self.param {
            SweepParam::Mu => (self.rays, v),
            SweepParam::Rays => (v as usize, self.mu),
        };
        (rays, MergeConfig::new(mu).expect("validated"))
    }

    fn format_value(&self, v: f64) -> String {
        match self.param {
            SweepParam::Mu => format!("{v:.6}"),
            SweepParam::Rays => format!("{}", v as usize),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    /// Sequence name, or `all` for the unweighted mean over sequences.
    pub video: String,
    pub mean_iou: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("sweep_value,video,mean_iou\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{:.6}\n",
                self.spec.format_value(r.value),
                r.video,
                r.mean_iou
            ));
        }
        s
    }

    /// Mean IoU of the `all` row for `value`.
    pub fn all(&self, value: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.value == value && r.video == "all")
            .map(|r| r.mean_iou)
    }

    pub fn video(&self, value: f64, video: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.value == value && r.video == video)
            .map(|r| r.mean_iou)
    }
}

/// Encodes and decodes every non-empty instance frame at each sweep value,
/// then averages IoU per video and over videos. Writes `sweep.csv` to `out`.
pub fn sweep(index: &DatasetIndex, spec: &SweepSpec, out: &Path) -> Result<SweepReport> {
    let settings: Vec<(usize, MergeConfig)> =
        spec.values.iter().map(|&v| spec.settings(v)).collect();

    let mut per_video: Vec<(String, Vec<f64>)> = Vec::new();
    for seq in &index.sequences {
        let targets = seq.targets();
        // Rows of per-value IoUs, one row per non-empty instance frame.
        let frames: Vec<Vec<Vec<f64>>> = seq
            .annotations
            .par_iter()
            .map(|path| {
                let labels = LabelMap::load_png(path)?;
                let mut rows = Vec::new();
                for t in &targets {
                    let mask = t.mask(&labels);
                    if mask.is_empty() {
                        continue;
                    }
                    let row = settings
                        .iter()
                        .map(|(rays, cfg)| Ok(round_trip(&mask, *rays, cfg)?.expect("non-empty").1))
                        .collect::<Result<Vec<f64>>>()?;
                    rows.push(row);
                }
                Ok(rows)
            })
            .collect::<Result<_>>()?;
        let rows: Vec<Vec<f64>> = frames.into_iter().flatten().collect();
        if rows.is_empty() {
            log::warn!(
                "{}: no non-empty instance frames, left out of the sweep",
                seq.name
            );
            continue;
        }
        let means = (0..settings.len())
            .map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / rows.len() as f64)
            .collect();
        per_video.push((seq.name.clone(), means));
    }
    if per_video.is_empty() {
        return Err(CliError::Validation(
            "no non-empty instance frames to sweep".into(),
        ));
    }

    let mut rows = Vec::new();
    for (k, &value) in spec.values.iter().enumerate() {
        for (name, means) in &per_video {
            rows.push(SweepRow {
                value,
                video: name.clone(),
                mean_iou: means[k],
            });
        }
        let all = per_video.iter().map(|(_, m)| m[k]).sum::<f64>() / per_video.len() as f64;
        rows.push(SweepRow {
            value,
            video: "all".into(),
            mean_iou: all,
        });
    }
    let report = SweepReport {
        spec: spec.clone(),
        rows,
    };
    write_file(&out.join("sweep.csv"), report.to_csv().as_bytes())?;
    Ok(report)
}
