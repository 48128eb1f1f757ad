//! Raster types shared by every stage of the pipeline.
//!
//! All rasters are row-major: the pixel at column `u`, row `v` lives at
//! index `v * width + u`.

mod io;
mod median;

pub use io::{load_disparity, load_mask, save_disparity, save_gray, save_mask, write_atomic};
pub use median::median_filter;

use crate::error::{Error, Result};
use crate::segmentation::{connected_components, Connectivity, RegionStats};

/// Image coordinate: `u` is the column, `v` the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PixelCoord {
    pub u: usize,
    pub v: usize,
}

impl PixelCoord {
    pub fn new(u: usize, v: usize) -> Self {
        Self { u, v }
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    if width * height != len {
        return Err(Error::InvalidParameter(format!(
            "raster of {len} values does not match {width}x{height}"
        )));
    }
    Ok(())
}

/// Dense disparity raster with per-pixel validity.
///
/// Values are in pixels. A pixel is valid only if its disparity is finite and
/// non-negative; the value stored under an invalid pixel is never read.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl DisparityImage {
    /// Builds an image from values and an explicit validity raster.
    ///
    /// Pixels flagged valid with a non-finite or negative value are rejected.
    pub fn new(width: usize, height: usize, values: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        check_dims(width, height, values.len())?;
        check_dims(width, height, valid.len())?;
        if let Some(i) = values
            .iter()
            .zip(&valid)
            .position(|(g, &ok)| ok && !(g.is_finite() && *g >= 0.0))
        {
            return Err(Error::InvalidParameter(format!(
                "valid pixel ({}, {}) holds disparity {}",
                i % width,
                i / width,
                values[i]
            )));
        }
        Ok(Self {
            width,
            height,
            values,
            valid,
        })
    }

    /// Builds an image where every finite, non-negative value is valid.
    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        let valid = values.iter().map(|g| g.is_finite() && *g >= 0.0).collect();
        Self::new(width, height, values, valid)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                values.push(f(u, v));
            }
        }
        Self::from_values(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn validity(&self) -> &[bool] {
        &self.valid
    }

    /// Disparity at `(u, v)`, or `None` for an invalid pixel.
    pub fn get(&self, u: usize, v: usize) -> Option<f64> {
        let i = v * self.width + u;
        self.valid[i].then(|| self.values[i])
    }

    pub fn is_valid(&self, u: usize, v: usize) -> bool {
        self.valid[v * self.width + u]
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&b| b).count()
    }

    /// Iterates `(u, v, g)` over valid pixels in raster order.
    pub fn iter_valid(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let w = self.width;
        self.values
            .iter()
            .zip(&self.valid)
            .enumerate()
            .filter(|(_, (_, &ok))| ok)
            .map(move |(i, (&g, _))| (i % w, i / w, g))
    }
}

/// Real-valued single-channel raster.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(width, height, values.len())?;
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("gray image holds a non-finite value".into()));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                values.push(f(u, v));
            }
        }
        Self::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.values[v * self.width + u]
    }
}

/// Binary raster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                data.push(f(u, v));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, u: usize, v: usize) -> bool {
        self.data[v * self.width + u]
    }

    pub fn set(&mut self, u: usize, v: usize, value: bool) {
        self.data[v * self.width + u] = value;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn into_data(self) -> Vec<bool> {
        self.data
    }
}

/// Pixel-level detection output: a binary raster plus its labeled regions.
///
/// `labels[i] > 0` exactly when pixel `i` is damaged, and region ids run
/// contiguously from 1 to `regions.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct DamageMask {
    damaged: BinaryImage,
    labels: Vec<u32>,
    regions: Vec<RegionStats>,
}

impl DamageMask {
    /// Labels `damaged` with the given connectivity.
    pub fn from_binary(damaged: BinaryImage, connectivity: Connectivity) -> Self {
        let labeling = connected_components(&damaged, connectivity);
        Self {
            damaged,
            labels: labeling.labels,
            regions: labeling.regions,
        }
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            damaged: BinaryImage::empty(width, height),
            labels: vec![0; width * height],
            regions: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.damaged.width()
    }

    pub fn height(&self) -> usize {
        self.damaged.height()
    }

    pub fn damaged(&self) -> &BinaryImage {
        &self.damaged
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn regions(&self) -> &[RegionStats] {
        &self.regions
    }

    pub fn damaged_count(&self) -> usize {
        self.damaged.count()
    }
}

/// Rectified stereo camera intrinsics and baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    /// Focal length in pixels.
    pub focal_length: f64,
    /// Baseline in metres.
    pub baseline: f64,
    /// Principal point `(c_x, c_y)` in pixels.
    pub principal_point: (f64, f64),
    /// Raw raster units per pixel of disparity.
    pub disparity_scale: f64,
}

impl CameraModel {
    pub fn new(focal_length: f64, baseline: f64, principal_point: (f64, f64), disparity_scale: f64) -> Result<Self> {
        let cam = Self {
            focal_length,
            baseline,
            principal_point,
            disparity_scale,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.focal_length) || !positive(self.baseline) || !positive(self.disparity_scale) {
            return Err(Error::InvalidParameter(
                "camera focal length, baseline and disparity scale must be positive".into(),
            ));
        }
        if !self.principal_point.0.is_finite() || !self.principal_point.1.is_finite() {
            return Err(Error::InvalidParameter("principal point must be finite".into()));
        }
        Ok(())
    }
}
