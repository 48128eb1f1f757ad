use crate::error::{Error, Result};
use crate::imaging::{median_filter, BinaryImage, DamageMask, DisparityImage, GrayImage};
use crate::road::{fit_model, road_samples, transform_disparity, RoadDisparityModel, TransformedDisparity};
use crate::segmentation::{histogram_with_bins, morphological_open, remove_small_regions, segment_below, ThresholdResult};
use crate::surface::{
    disparity_to_pointcloud, extract_damage, ransac_fit, DamageInput, FitReport, SurfaceFrame, SurfacePoint,
};

use super::PipelineConfig;

/// Fewest road pixels that can support a quadratic fit.
const MIN_ROAD_PIXELS: usize = 6;

/// Result of [`detect_potholes`] with its intermediate products.
#[derive(Debug, Clone)]
pub struct Detection {
    pub mask: DamageMask,
    pub model: RoadDisparityModel,
    pub fit: FitReport,
    pub transformed: TransformedDisparity,
    pub threshold: ThresholdResult,
    /// Pixels classified as undamaged road and handed to the surface fit.
    pub road_mask: BinaryImage,
}

/// Runs the hybrid pipeline on one disparity image.
///
/// The transformed raster is thresholded; the high side is taken as
/// undamaged road, a quadratic surface is fitted to the original disparities
/// there, and pixels falling short of it by `tau` or more are flagged.
pub fn detect_potholes(disp: &DisparityImage, cfg: &PipelineConfig) -> Result<Detection> {
    cfg.validate()?;
    let samples = road_samples(disp, cfg.fit_stride.max(1));
    let model = fit_model(&samples)?;
    let transformed = transform_disparity(disp, &model);

    let smoothed;
    let img = if cfg.median_radius > 0 {
        smoothed = median_filter(&transformed.image, cfg.median_radius)?;
        &smoothed
    } else {
        &transformed.image
    };
    let hist = histogram_with_bins(img, Some(&transformed.valid), cfg.histogram_bins)?;
    let threshold = cfg.threshold_method.apply(&hist)?;
    let (w, h) = disp.dims();
    let road_mask = BinaryImage::from_fn(w, h, |u, v| {
        transformed.valid[v * w + u] && img.get(u, v) >= threshold.threshold
    });
    let road_count = road_mask.count();
    if road_count < MIN_ROAD_PIXELS {
        return Err(Error::EmptyRoadMask {
            needed: MIN_ROAD_PIXELS,
            got: road_count,
        });
    }

    let params = cfg.damage_params();
    let (fit, mask) = match &cfg.camera {
        None => {
            let points: Vec<SurfacePoint> = disp
                .iter_valid()
                .filter(|&(u, v, _)| road_mask.get(u, v))
                .map(|(u, v, g)| SurfacePoint::new(u as f64, v as f64, g))
                .collect();
            let fit = ransac_fit(&points, SurfaceFrame::ImageUV, &cfg.ransac)?;
            let mask = extract_damage(DamageInput::Disparity(disp), &fit.surface, &params)?;
            (fit, mask)
        }
        Some(cam) => {
            let cloud = disparity_to_pointcloud(disp, cam, cfg.min_disparity)?;
            let points: Vec<SurfacePoint> = cloud
                .points
                .iter()
                .zip(&cloud.source_pixel)
                .filter(|(_, px)| road_mask.get(px.u, px.v))
                .map(|(p, _)| SurfacePoint::new(p.x, p.z, p.y))
                .collect();
            let fit = ransac_fit(&points, SurfaceFrame::MetricXZ, &cfg.ransac)?;
            let mask = extract_damage(DamageInput::Cloud(&cloud), &fit.surface, &params)?;
            (fit, mask)
        }
    };

    Ok(Detection {
        mask,
        model: transformed.model,
        fit,
        transformed,
        threshold,
        road_mask,
    })
}

/// Threshold-only detection for inputs that ship a transformed disparity but
/// no original disparity: the low side of the threshold, opened and
/// area-filtered.
pub fn detect_from_transformed(
    img: &GrayImage,
    valid: &[bool],
    cfg: &PipelineConfig,
) -> Result<(DamageMask, ThresholdResult)> {
    cfg.validate()?;
    let (w, h) = img.dims();
    if valid.len() != w * h {
        return Err(Error::DimensionMismatch {
            expected: (w, h),
            actual: (valid.len(), 1),
        });
    }
    let smoothed;
    let img = if cfg.median_radius > 0 {
        smoothed = median_filter(img, cfg.median_radius)?;
        &smoothed
    } else {
        img
    };
    let hist = histogram_with_bins(img, Some(valid), cfg.histogram_bins)?;
    let threshold = cfg.threshold_method.apply(&hist)?;
    let raw = segment_below(img, threshold.threshold, valid, cfg.connectivity);
    let opened = morphological_open(raw.damaged(), cfg.open_radius);
    let cleaned = remove_small_regions(&opened, cfg.min_region_area, cfg.connectivity);
    Ok((DamageMask::from_binary(cleaned, cfg.connectivity), threshold))
}
