//! Metric evaluation of predicted masks against an annotated dataset.

use std::path::Path;

use polarvos_core::metrics::{
    aggregate, contour_f, frame_pixel_error, jaccard, AggregateStats, ApeMode,
};
use polarvos_core::LabelMap;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{file_stem, files_with_ext, DatasetIndex};
use crate::error::{CliError, Result};
use crate::labels::write_file;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    pub contour_tol: f64,
    pub ape_mode: ApeMode,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            contour_tol: polarvos_core::metrics::DEFAULT_CONTOUR_TOL,
            ape_mode: ApeMode::OneSided,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameScore {
    pub frame: String,
    pub j: f64,
    pub f: f64,
    pub ape: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObjectReport {
    pub name: String,
    pub j: AggregateStats,
    pub f: AggregateStats,
    pub ape: f64,
    pub frames: Vec<FrameScore>,
}

/// Dataset-level numbers average the per-object statistics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub ape_mode: ApeMode,
    pub contour_tol: f64,
    pub j: AggregateStats,
    pub f: AggregateStats,
    pub ape: f64,
    pub objects: Vec<ObjectReport>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("sequence,frame,J,F,APE\n");
        for o in &self.objects {
            for fr in &o.frames {
                s.push_str(&format!(
                    "{},{},{:.6},{:.6},{}\n",
                    o.name, fr.frame, fr.j, fr.f, fr.ape
                ));
            }
        }
        s
    }
}

fn mean_stats(stats: &[AggregateStats]) -> AggregateStats {
    let n = stats.len() as f64;
    AggregateStats {
        mean: stats.iter().map(|s| s.mean).sum::<f64>() / n,
        recall: stats.iter().map(|s| s.recall).sum::<f64>() / n,
        decay: stats.iter().map(|s| s.decay).sum::<f64>() / n,
    }
}

/// Scores `pred_root/<sequence>/*.png` (matched to ground truth by sorted
/// order) and writes `eval.json` and `eval.csv` to `out`.
pub fn evaluate(
    pred_root: &Path,
    gt: &DatasetIndex,
    out: &Path,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    if !pred_root.is_dir() {
        return Err(CliError::io(pred_root, "not a directory"));
    }
    let mut objects = Vec::new();
    for seq in &gt.sequences {
        let pred_dir = pred_root.join(&seq.name);
        let preds = if pred_dir.is_dir() {
            files_with_ext(&pred_dir, &["png"])?
        } else {
            Vec::new()
        };
        if preds.len() != seq.annotations.len() {
            return Err(CliError::Validation(format!(
                "sequence {}: {} predicted frames for {} annotated frames",
                seq.name,
                preds.len(),
                seq.annotations.len()
            )));
        }
        let targets = seq.targets();
        let scores: Vec<Vec<FrameScore>> = preds
            .par_iter()
            .zip(seq.annotations.par_iter())
            .map(|(p, g)| {
                let pl = LabelMap::load_png(p)?;
                let gl = LabelMap::load_png(g)?;
                targets
                    .iter()
                    .map(|t| {
                        let (m, gm) = (t.mask(&pl), t.mask(&gl));
                        Ok(FrameScore {
                            frame: file_stem(g),
                            j: jaccard(&m, &gm)?,
                            f: contour_f(&m, &gm, opts.contour_tol)?,
                            ape: frame_pixel_error(&m, &gm, opts.ape_mode)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;

        for (k, &t) in targets.iter().enumerate() {
            let frames: Vec<FrameScore> = scores.iter().map(|row| row[k].clone()).collect();
            let js: Vec<f64> = frames.iter().map(|s| s.j).collect();
            let fs: Vec<f64> = frames.iter().map(|s| s.f).collect();
            let ape = frames.iter().map(|s| s.ape).sum::<usize>() as f64 / frames.len() as f64;
            objects.push(ObjectReport {
                name: seq.target_name(t),
                j: aggregate(&js)?,
                f: aggregate(&fs)?,
                ape,
                frames,
            });
        }
    }

    let js: Vec<AggregateStats> = objects.iter().map(|o| o.j).collect();
    let fs: Vec<AggregateStats> = objects.iter().map(|o| o.f).collect();
    let report = EvalReport {
        ape_mode: opts.ape_mode,
        contour_tol: opts.contour_tol,
        j: mean_stats(&js),
        f: mean_stats(&fs),
        ape: objects.iter().map(|o| o.ape).sum::<f64>() / objects.len() as f64,
        objects,
    };
    write_file(&out.join("eval.json"), report.to_json().as_bytes())?;
    write_file(&out.join("eval.csv"), report.to_csv().as_bytes())?;
    Ok(report)
}
