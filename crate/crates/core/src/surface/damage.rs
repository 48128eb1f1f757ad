use std::str::FromStr;

use super::{PointCloud3D, QuadraticSurface, SurfaceFrame};
use crate::error::{Error, Result};
use crate::imaging::{BinaryImage, DamageMask, DisparityImage};
use crate::segmentation::{morphological_open, remove_small_regions, Connectivity};

/// Which side of the surface counts as damage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Polarity {
    /// Depressions (potholes).
    #[default]
    Below,
    /// Bumps.
    Above,
    Both,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Below => "below",
            Polarity::Above => "above",
            Polarity::Both => "both",
        }
    }

    fn flags(self, depth: f64, tau: f64) -> bool {
        match self {
            Polarity::Below => depth >= tau,
            Polarity::Above => -depth >= tau,
            Polarity::Both => depth.abs() >= tau,
        }
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "below" => Ok(Self::Below),
            "above" => Ok(Self::Above),
            "both" => Ok(Self::Both),
            other => Err(Error::InvalidParameter(format!("unknown polarity {other}"))),
        }
    }
}

/// Observed road representation compared against a fitted surface.
#[derive(Debug, Clone, Copy)]
pub enum DamageInput<'a> {
    Cloud(&'a PointCloud3D),
    Disparity(&'a DisparityImage),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DamageParams {
    /// Minimum depth below (or height above) the surface, in frame units.
    pub tau: f64,
    pub polarity: Polarity,
    /// Opening radius; 0 disables the opening.
    pub open_radius: usize,
    /// Regions smaller than this are dropped.
    pub min_region_area: usize,
    pub connectivity: Connectivity,
}

impl DamageParams {
    pub fn new(tau: f64) -> Self {
        Self {
            tau,
            polarity: Polarity::Below,
            open_radius: 1,
            min_region_area: 50,
            connectivity: Connectivity::Four,
        }
    }
}

/// Flags pixels whose depth relative to the surface reaches `tau`.
///
/// Depth is `Y − f(X, Z)` for a point cloud (Y points down, so potholes are
/// positive) and `f(u, v) − g` for a disparity raster (potholes are farther
/// away and have smaller disparity). The raw flags are opened and filtered by
/// region area before labeling.
pub fn extract_damage(input: DamageInput<'_>, surface: &QuadraticSurface, params: &DamageParams) -> Result<DamageMask> {
    if !(params.tau >= 0.0) {
        return Err(Error::InvalidParameter("damage threshold must be non-negative".into()));
    }
    let raw = match input {
        DamageInput::Cloud(cloud) => {
            if surface.frame != SurfaceFrame::MetricXZ {
                return Err(Error::FrameMismatch);
            }
            let mut mask = BinaryImage::empty(cloud.width, cloud.height);
            for (p, px) in cloud.points.iter().zip(&cloud.source_pixel) {
                let depth = p.y - surface.evaluate(p.x, p.z);
                if params.polarity.flags(depth, params.tau) {
                    mask.set(px.u, px.v, true);
                }
            }
            mask
        }
        DamageInput::Disparity(disp) => {
            if surface.frame != SurfaceFrame::ImageUV {
                return Err(Error::FrameMismatch);
            }
            let (w, h) = disp.dims();
            BinaryImage::from_fn(w, h, |u, v| match disp.get(u, v) {
                Some(g) => params
                    .polarity
                    .flags(surface.evaluate(u as f64, v as f64) - g, params.tau),
                None => false,
            })
        }
    };
    let opened = morphological_open(&raw, params.open_radius);
    let cleaned = remove_small_regions(&opened, params.min_region_area, params.connectivity);
    Ok(DamageMask::from_binary(cleaned, params.connectivity))
}
