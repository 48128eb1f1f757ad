use rayon::prelude::*;

use super::RoadDisparityModel;
use crate::imaging::{DisparityImage, GrayImage};

/// Output of [`transform_disparity`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedDisparity {
    /// `G′`; invalid pixels hold 0.
    pub image: GrayImage,
    /// Validity carried over unchanged from the input.
    pub valid: Vec<bool>,
    /// The input model with `lambda` set.
    pub model: RoadDisparityModel,
}

/// Subtracts the road model and shifts so the smallest valid value is exactly 0.
///
/// Undamaged road ends up near the constant `Λ` and depressions fall below it.
pub fn transform_disparity(disp: &DisparityImage, model: &RoadDisparityModel) -> TransformedDisparity {
    let (w, h) = disp.dims();
    let mut residual = vec![0.0; w * h];
    residual
        .par_chunks_mut(w)
        .enumerate()
        .for_each(|(v, row)| {
            for (u, r) in row.iter_mut().enumerate() {
                if let Some(g) = disp.get(u, v) {
                    *r = g - model.predict(u as f64, v as f64);
                }
            }
        });
    let valid = disp.validity().to_vec();
    let min = residual
        .iter()
        .zip(&valid)
        .filter(|(_, &ok)| ok)
        .map(|(&r, _)| r)
        .fold(f64::INFINITY, f64::min);
    let lambda = if min.is_finite() { -min } else { 0.0 };
    let values = residual
        .iter()
        .zip(&valid)
        .map(|(&r, &ok)| if ok { r - min } else { 0.0 })
        .collect();
    TransformedDisparity {
        image: GrayImage::new(w, h, values).expect("finite residuals"),
        valid,
        model: RoadDisparityModel { lambda, ..*model },
    }
}
