//! Polar label generation over a dataset.

use std::fs;
use std::io::Write;
use std::path::Path;

use polarvos_core::{decode, encode_at_mass_center, BinaryMask, LabelMap, MergeConfig, PolarMask};
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::DatasetIndex;
use crate::error::{CliError, Result};

/// Encodes `mask` around its mass center and scores the decoded polygon
/// against it. `None` for an empty mask.
pub fn round_trip(
    mask: &BinaryMask,
    rays: usize,
    cfg: &MergeConfig,
) -> Result<Option<(PolarMask, f64)>> {
    if mask.is_empty() {
        return Ok(None);
    }
    let polar = encode_at_mass_center(mask, rays, cfg)?;
    let iou = decode(&polar, mask.width(), mask.height())?.iou(mask)?;
    Ok(Some((polar, iou)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameStatus {
    Encoded,
    /// The instance has no pixels in this frame.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameRecord {
    pub frame: String,
    pub status: FrameStatus,
    /// Zero-based line in the instance's JSON-lines file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iou: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceSummary {
    pub name: String,
    /// Path of the JSON-lines file relative to the output directory.
    pub file: String,
    pub frames: Vec<FrameRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelSummary {
    pub rays: usize,
    pub mu: f64,
    pub encoded: usize,
    pub skipped: usize,
    pub instances: Vec<InstanceSummary>,
}

/// Writes one JSON-lines file of polar masks per instance under `out` and a
/// `summary.json` next to them.
pub fn generate_labels(
    index: &DatasetIndex,
    rays: usize,
    mu: f64,
    out: &Path,
) -> Result<LabelSummary> {
    if rays < 3 {
        return Err(CliError::Validation(format!(
            "ray count must be at least 3, got {rays}"
        )));
    }
    let cfg = MergeConfig::new(mu).map_err(|e| CliError::Validation(e.to_string()))?;

    let mut instances = Vec::new();
    let (mut encoded, mut skipped) = (0, 0);
    for seq in &index.sequences {
        let targets = seq.targets();
        // Per frame, one result per target.
        let per_frame: Vec<Vec<Option<(PolarMask, f64)>>> = seq
            .annotations
            .par_iter()
            .map(|path| {
                let labels = LabelMap::load_png(path)?;
                targets
                    .iter()
                    .map(|t| round_trip(&t.mask(&labels), rays, &cfg))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;

        let names = seq.frame_names();
        let dir = out.join(&seq.name);
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        for (k, &target) in targets.iter().enumerate() {
            let file = format!("{}/{}.jsonl", seq.name, target.file_stem());
            let mut lines = String::new();
            let mut line = 0;
            let mut frames = Vec::with_capacity(names.len());
            for (name, results) in names.iter().zip(&per_frame) {
                match &results[k] {
                    Some((polar, iou)) => {
                        frames.push(FrameRecord {
                            frame: name.clone(),
                            status: FrameStatus::Encoded,
                            line: Some(line),
                            iou: Some(*iou),
                        });
                        lines.push_str(&polar.to_json_line());
                        lines.push('\n');
                        line += 1;
                        encoded += 1;
                    }
                    None => {
                        log::warn!(
                            "{} frame {name}: empty mask, skipped",
                            seq.target_name(target)
                        );
                        frames.push(FrameRecord {
                            frame: name.clone(),
                            status: FrameStatus::Skipped,
                            line: None,
                            iou: None,
                        });
                        skipped += 1;
                    }
                }
            }
            write_file(&out.join(&file), lines.as_bytes())?;
            instances.push(InstanceSummary {
                name: seq.target_name(target),
                file,
                frames,
            });
        }
    }

    let summary = LabelSummary {
        rays,
        mu,
        encoded,
        skipped,
        instances,
    };
    let mut json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    json.push('\n');
    write_file(&out.join("summary.json"), json.as_bytes())?;
    Ok(summary)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(path, e))
}
