//! Texture description with deterministic partially self-avoiding walks
//! ("tourist walks") performed on thresholded pixel maps.
//!
//! The pipeline is:
//!
//! 1. [`pixel_map`]: a grayscale [`Raster`] plus a movement [`Rule`] and a
//!    threshold index `k` form a [`WalkMap`], which decides which of the
//!    eight geometric neighbors a walker may step to.
//! 2. [`walk`]: a walker with memory `mu` starts on every pixel and records
//!    the length of its transient and the period of its attractor.
//! 3. [`descriptor`]: trajectories become a joint distribution, then a
//!    histogram, then the concatenated feature vectors.
//! 4. [`eval`]: linear discriminant analysis under stratified k-fold
//!    cross-validation.
//!
//! [`dataset`] handles corpus ingestion (PGM and common raster formats) and
//! seeded synthetic textures.

pub mod dataset;
pub mod descriptor;
pub mod error;
pub mod eval;
pub mod fsutil;
pub mod pixel_map;
pub mod walk;

pub use descriptor::{
    DescriptorConfig, FeatureColumn, FeatureMatrix, FeatureVector, JointDistribution,
};
pub use error::{Error, Result};
pub use eval::{CvReport, LabeledDataset, LdaModel};
pub use pixel_map::{Raster, Rule, Thresholds, WalkMap};
pub use walk::{Trajectory, WalkConfig, Walker};
