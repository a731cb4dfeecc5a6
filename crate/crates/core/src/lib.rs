//! Polar mask representation for video object segmentation.
//!
//! A mask is encoded as a center plus `N` equiangular ray lengths. This crate
//! covers the whole round trip (contour extraction, fragment merging, ray
//! casting, polygon assembly), the training-side scores and losses built on
//! the encoding, polar-mask NMS, the parameter-free neck operators and the
//! standard VOS metrics.

pub mod contour;
pub mod error;
pub mod label;
pub mod mask;
pub mod metrics;
pub mod netops;
pub mod nms;
pub mod polar;
pub mod raster;
pub mod scoring;
pub mod synth;

pub use contour::{extract_contours, Contour, Point};
pub use error::{Error, Result};
pub use label::LabelMap;
pub use mask::{bbox_of, mass_center, BBox, BinaryMask};
pub use polar::{
    contour_diameter, decode, encode, encode_at_mass_center, merge_contours,
    sample_center_candidates, CenterCandidate, CenterSampleConfig, MergeConfig, PolarMask,
    SENTINEL,
};
pub use raster::rasterize_polygon;
