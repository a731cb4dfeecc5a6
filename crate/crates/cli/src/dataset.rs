//! Dataset discovery: sequences, their annotation frames and instance ids.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use polarvos_core::{BinaryMask, LabelMap};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// `Annotations/[480p/]<seq>/<frame>.png`, frames under `JPEGImages/`.
    #[default]
    Davis,
    /// `<root>/<seq>/<frame>.png`.
    Flat,
}

impl FromStr for Layout {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "davis" => Ok(Layout::Davis),
            "flat" => Ok(Layout::Flat),
            other => Err(format!("unknown layout '{other}' (expected davis or flat)")),
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layout::Davis => "davis",
            Layout::Flat => "flat",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sequence {
    pub name: String,
    /// Annotation PNGs sorted by file name.
    pub annotations: Vec<PathBuf>,
    /// Image frames, when the layout provides them.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub frames: Vec<PathBuf>,
    /// Nonzero label values seen in any annotation, ascending.
    pub instance_ids: Vec<u8>,
}

impl Sequence {
    /// File stem of every annotation, in order.
    pub fn frame_names(&self) -> Vec<String> {
        self.annotations.iter().map(|p| file_stem(p)).collect()
    }

    /// Instances scored independently. A sequence with at most one id is
    /// treated as a single object covering every nonzero pixel.
    pub fn targets(&self) -> Vec<Target> {
        if self.instance_ids.len() <= 1 {
            vec![Target::Foreground]
        } else {
            self.instance_ids
                .iter()
                .map(|&id| Target::Instance(id))
                .collect()
        }
    }

    /// Display name of one target: the sequence name, suffixed `#id` for multi-instance sequences.
    pub fn target_name(&self, target: Target) -> String {
        match target {
            Target::Foreground => self.name.clone(),
            Target::Instance(id) => format!("{}#{id}", self.name),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Foreground,
    Instance(u8),
}

impl Target {
    pub fn mask(self, labels: &LabelMap) -> BinaryMask {
        match self {
            Target::Foreground => labels.nonzero_mask(),
            Target::Instance(id) => labels.instance_mask(id),
        }
    }

    /// Output file stem for this target.
    pub fn file_stem(self) -> String {
        match self {
            Target::Foreground => "object".to_string(),
            Target::Instance(id) => id.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DatasetIndex {
    pub root: PathBuf,
    pub layout: Layout,
    pub sequences: Vec<Sequence>,
}

impl DatasetIndex {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("index serializes");
        s.push('\n');
        s
    }
}

pub(crate) fn file_stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        out.push(entry.map_err(|e| CliError::io(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

pub(crate) fn files_with_ext(dir: &Path, exts: &[&str]) -> Result<Vec<PathBuf>> {
    Ok(sorted_entries(dir)?
        .into_iter()
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .map(|e| exts.iter().any(|x| e.eq_ignore_ascii_case(x)))
                    .unwrap_or(false)
        })
        .collect())
}

fn pick_resolution(dir: PathBuf) -> PathBuf {
    let hd = dir.join("480p");
    if hd.is_dir() {
        hd
    } else {
        dir
    }
}

/// Scans `root` for annotated sequences and reads every annotation once to
/// collect instance ids.
pub fn ingest(root: &Path, layout: Layout) -> Result<DatasetIndex> {
    if !root.is_dir() {
        return Err(CliError::io(root, "not a directory"));
    }
    let (ann_root, frame_root) = match layout {
        Layout::Davis => (
            pick_resolution(root.join("Annotations")),
            Some(pick_resolution(root.join("JPEGImages"))),
        ),
        Layout::Flat => (root.to_path_buf(), None),
    };
    let no_sequences = || CliError::Validation(format!("no sequences found in {}", root.display()));
    if !ann_root.is_dir() {
        return Err(no_sequences());
    }

    let mut sequences = Vec::new();
    for dir in sorted_entries(&ann_root)?
        .into_iter()
        .filter(|p| p.is_dir())
    {
        let annotations = files_with_ext(&dir, &["png"])?;
        if annotations.is_empty() {
            continue;
        }
        let name = dir.file_name().unwrap().to_string_lossy().into_owned();
        let frames = match &frame_root {
            Some(fr) if fr.join(&name).is_dir() => {
                files_with_ext(&fr.join(&name), &["jpg", "jpeg", "png"])?
            }
            _ => Vec::new(),
        };
        sequences.push(Sequence {
            name,
            annotations,
            frames,
            instance_ids: Vec::new(),
        });
    }
    if sequences.is_empty() {
        return Err(no_sequences());
    }

    let mut bad = Vec::new();
    for seq in &mut sequences {
        let loaded: Vec<_> = seq
            .annotations
            .par_iter()
            .map(|p| LabelMap::load_png(p).map_err(|_| p.clone()))
            .collect();
        let mut present = [false; 256];
        for r in loaded {
            match r {
                Ok(labels) => labels
                    .instance_ids()
                    .into_iter()
                    .for_each(|id| present[id as usize] = true),
                Err(p) => bad.push(p),
            }
        }
        seq.instance_ids = (1..=255u8).filter(|&id| present[id as usize]).collect();
    }
    if !bad.is_empty() {
        return Err(CliError::unreadable(&bad));
    }
    log::info!(
        "indexed {} sequences under {}",
        sequences.len(),
        root.display()
    );
    Ok(DatasetIndex {
        root: root.to_path_buf(),
        layout,
        sequences,
    })
}
