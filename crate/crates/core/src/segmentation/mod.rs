//! Histogram thresholding, binary morphology and region labeling.

mod components;
mod histogram;
mod morphology;
mod threshold;

pub use components::{connected_components, remove_small_regions, Connectivity, Labeling, RegionStats};
pub use histogram::{histogram, histogram_with_bins, Histogram, DEFAULT_BINS};
pub use morphology::{dilate, erode, morphological_open};
pub use threshold::{otsu_threshold, triangle_threshold, ThresholdMethod, ThresholdResult};

use crate::imaging::{BinaryImage, DamageMask, GrayImage};

/// Marks valid pixels strictly below `threshold` and labels the result.
pub fn segment_below(img: &GrayImage, threshold: f64, valid: &[bool], connectivity: Connectivity) -> DamageMask {
    let (w, h) = img.dims();
    let data = img
        .values()
        .iter()
        .zip(valid)
        .map(|(&x, &ok)| ok && x < threshold)
        .collect();
    let bin = BinaryImage::new(w, h, data).expect("validity raster matches image");
    DamageMask::from_binary(bin, connectivity)
}
