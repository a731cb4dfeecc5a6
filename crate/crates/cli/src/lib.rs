//! Batch front end over `polarvos-core`: dataset ingestion, polar label
//! generation, merge-ratio and ray-count sweeps, and metric evaluation.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod labels;
pub mod sweep;

pub use dataset::{ingest, DatasetIndex, Layout, Sequence, Target};
pub use error::{CliError, Result};
pub use eval::{evaluate, EvalOptions, EvalReport};
pub use labels::{generate_labels, round_trip, LabelSummary};
pub use sweep::{sweep, SweepParam, SweepReport, SweepSpec};
