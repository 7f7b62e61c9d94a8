//! Deterministic image-corruption synthesis and segmentation robustness
//! evaluation.
//!
//! The crate has two halves:
//!
//! - **Corruption synthesis**: 19 corruption kinds across the blur, noise,
//!   digital, weather and geometric families, each parameterized by five
//!   severity levels, applied reproducibly (seeded per image and spec) over
//!   whole dataset trees.
//! - **Evaluation**: confusion matrices, mean Intersection-over-Union,
//!   Degradation, and the Corruption Degradation (CD) / relative Corruption
//!   Degradation (rCD) aggregates computed from externally produced
//!   prediction label maps.
//!
//! See the `examples/` directory for one runnable program per capability and
//! the `corrobench` binary for the batch pipeline.

pub mod blur;
pub mod cli;
pub mod error;
pub mod imgio;
pub mod noise;
pub mod pixel;
pub mod rng;

pub use error::{Error, Result};
pub use pixel::{LabelMap, LinearImage, RasterImage};
