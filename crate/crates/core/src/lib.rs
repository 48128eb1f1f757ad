//! Road pothole detection from dense disparity images.
//!
//! The pipeline fits a road-disparity model with a roll angle, transforms the
//! disparity image so healthy road becomes flat, thresholds the result to find
//! candidate road pixels, fits a quadratic road surface robustly with RANSAC,
//! and flags pixels that sit below that surface.

pub mod cli;
pub mod error;
pub mod imaging;
mod linalg;
pub mod pipeline;
pub mod road;
pub mod segmentation;
pub mod surface;
pub mod synth;

pub use error::{Error, Result};
