//! Road-disparity projection model: roll-angle estimation, coefficient
//! recovery and the disparity transformation that flattens the road.
//!
//! On-road pixels satisfy `g = ϰ (−sinΦ·u + cosΦ·v + κ)`. Fitting `Φ` reduces to
//! a one-dimensional minimisation of the residual energy left after projecting
//! `g` onto `span{1, cosΦ·v − sinΦ·u}`; `κ` and `ϰ` then follow from a 2×2
//! least-squares solve.

mod model;
mod roll;
mod transform;
mod vdisparity;

pub use model::{load_model, parse_model, save_model, RoadDisparityModel};
pub use roll::{fit_model, fit_roll_angle, roll_energy, RollMoments, RollSearch};
pub use transform::{transform_disparity, TransformedDisparity};
pub use vdisparity::{build_v_disparity, build_v_disparity_with_bins, VDisparityMap};

use crate::imaging::DisparityImage;

/// One observation feeding the roll-angle energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadPixelSample {
    pub u: f64,
    pub v: f64,
    pub g: f64,
}

impl RoadPixelSample {
    pub fn new(u: f64, v: f64, g: f64) -> Self {
        Self { u, v, g }
    }
}

/// Collects valid pixels whose row and column are multiples of `stride`.
///
/// A stride of 0 or 1 takes every valid pixel.
pub fn road_samples(disp: &DisparityImage, stride: usize) -> Vec<RoadPixelSample> {
    let stride = stride.max(1);
    disp.iter_valid()
        .filter(|&(u, v, _)| u % stride == 0 && v % stride == 0)
        .map(|(u, v, g)| RoadPixelSample::new(u as f64, v as f64, g))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stride_subsamples_on_grid() {
        let disp = DisparityImage::from_fn(5, 4, |u, v| (u + v) as f64).unwrap();
        assert_eq!(road_samples(&disp, 1).len(), 20);
        let s = road_samples(&disp, 2);
        assert_eq!(s.len(), 3 * 2);
        assert!(s.iter().all(|p| p.u as usize % 2 == 0 && p.v as usize % 2 == 0));
    }
}
