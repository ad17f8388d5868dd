//! Generation engine for image-caption agreement datasets.
//!
//! Worlds of colored shapes are sampled under per-split constraints, rendered
//! to small RGB images and paired with controlled-English captions whose truth
//! value is computed exactly from the world.

pub mod error;
pub mod export;
pub mod geometry;
pub mod instancegen;
pub mod language;
pub mod raster;
pub mod semantics;
pub mod worldgen;

pub use error::{GenError, Result};
