use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::CameraModel;
use crate::segmentation::{Connectivity, ThresholdMethod, DEFAULT_BINS};
use crate::surface::{DamageParams, Polarity, RansacConfig};

/// Damage threshold in the image frame when none is configured, in pixels.
pub const DEFAULT_TAU_PX: f64 = 1.0;
/// Damage threshold in the metric frame when none is configured, in metres.
pub const DEFAULT_TAU_M: f64 = 0.04;

/// Every tunable of [`detect_potholes`](super::detect_potholes).
///
/// Read from UTF-8 `key = value` files with `#` comments. Thresholds left out
/// of a file take the default of the fitting frame: pixels without a camera,
/// metres with one.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Raw raster units per pixel of disparity; `None` picks 256 for 16-bit and 1 for 8-bit.
    pub disparity_scale: Option<f64>,
    pub invalid_value: u16,
    pub fit_stride: usize,
    pub histogram_bins: usize,
    pub threshold_method: ThresholdMethod,
    /// Median radius applied to the transformed raster before thresholding (0 = off).
    pub median_radius: usize,
    pub ransac: RansacConfig,
    pub tau: f64,
    pub polarity: Polarity,
    pub open_radius: usize,
    pub min_region_area: usize,
    pub connectivity: Connectivity,
    /// Pixels below this disparity are skipped when reconstructing 3-D points.
    pub min_disparity: f64,
    pub camera: Option<CameraModel>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            disparity_scale: None,
            invalid_value: 0,
            fit_stride: 1,
            histogram_bins: DEFAULT_BINS,
            threshold_method: ThresholdMethod::Otsu,
            median_radius: 0,
            ransac: RansacConfig {
                inlier_threshold: DEFAULT_TAU_PX,
                ..RansacConfig::default()
            },
            tau: DEFAULT_TAU_PX,
            polarity: Polarity::Below,
            open_radius: 1,
            min_region_area: 50,
            connectivity: Connectivity::Four,
            min_disparity: 1.0,
            camera: None,
        }
    }
}

#[derive(Default)]
struct CameraKeys {
    focal_length: Option<f64>,
    baseline: Option<f64>,
    cx: Option<f64>,
    cy: Option<f64>,
}

impl PipelineConfig {
    /// Metric-frame configuration with metre thresholds.
    pub fn metric(camera: CameraModel) -> Self {
        let mut cfg = Self {
            camera: Some(camera),
            tau: DEFAULT_TAU_M,
            ..Self::default()
        };
        cfg.ransac.inlier_threshold = DEFAULT_TAU_M;
        cfg
    }

    pub fn damage_params(&self) -> DamageParams {
        DamageParams {
            tau: self.tau,
            polarity: self.polarity,
            open_radius: self.open_radius,
            min_region_area: self.min_region_area,
            connectivity: self.connectivity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.disparity_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidParameter("disparity_scale must be positive".into()));
            }
        }
        if self.histogram_bins < 2 {
            return Err(Error::InvalidParameter("histogram_bins must be at least 2".into()));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter("tau must be non-negative".into()));
        }
        if !(self.min_disparity > 0.0) {
            return Err(Error::InvalidParameter("min_disparity must be positive".into()));
        }
        self.ransac.validate()?;
        if let Some(cam) = &self.camera {
            cam.validate()?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let pairs = parse_pairs(text)?;
        cfg.apply_pairs(&pairs)?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    /// Applies `key = value` overrides on top of the current values.
    pub fn apply_pairs(&mut self, pairs: &[(String, String)]) -> Result<()> {
        let mut cam = CameraKeys::default();
        let mut tau_set = false;
        let mut ransac_set = false;
        for (key, value) in pairs {
            let num = || -> Result<f64> {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::parse("config", format!("{key}: expected a number, got {value:?}")))
            };
            let int = || -> Result<u64> {
                value
                    .parse::<u64>()
                    .map_err(|_| Error::parse("config", format!("{key}: expected an integer, got {value:?}")))
            };
            match key.as_str() {
                "disparity_scale" => self.disparity_scale = Some(num()?),
                "invalid_value" => {
                    self.invalid_value = u16::try_from(int()?)
                        .map_err(|_| Error::parse("config", "invalid_value exceeds 16 bits"))?
                }
                "fit_stride" => self.fit_stride = int()? as usize,
                "histogram_bins" => self.histogram_bins = int()? as usize,
                "threshold_method" => self.threshold_method = value.parse()?,
                "median_radius" => self.median_radius = int()? as usize,
                "ransac_max_iterations" => self.ransac.max_iterations = int()? as usize,
                "ransac_threshold" => {
                    self.ransac.inlier_threshold = num()?;
                    ransac_set = true;
                }
                "ransac_confidence" => self.ransac.confidence = num()?,
                "ransac_min_sample" => self.ransac.min_sample = int()? as usize,
                "seed" => self.ransac.seed = int()?,
                "tau" => {
                    self.tau = num()?;
                    tau_set = true;
                }
                "polarity" => self.polarity = value.parse()?,
                "open_radius" => self.open_radius = int()? as usize,
                "min_region_area" => self.min_region_area = int()? as usize,
                "connectivity" => {
                    self.connectivity = match value.as_str() {
                        "4" => Connectivity::Four,
                        "8" => Connectivity::Eight,
                        _ => return Err(Error::parse("config", "connectivity must be 4 or 8")),
                    }
                }
                "min_disparity" => self.min_disparity = num()?,
                "focal_length" => cam.focal_length = Some(num()?),
                "baseline" => cam.baseline = Some(num()?),
                "cx" => cam.cx = Some(num()?),
                "cy" => cam.cy = Some(num()?),
                other => return Err(Error::parse("config", format!("unknown key {other:?}"))),
            }
        }
        match cam {
            CameraKeys {
                focal_length: None,
                baseline: None,
                cx: None,
                cy: None,
            } => {}
            CameraKeys {
                focal_length: Some(f),
                baseline: Some(b),
                cx: Some(cx),
                cy: Some(cy),
            } => {
                let newly_metric = self.camera.is_none();
                self.camera = Some(CameraModel::new(f, b, (cx, cy), self.disparity_scale.unwrap_or(1.0))?);
                if newly_metric {
                    if !tau_set {
                        self.tau = DEFAULT_TAU_M;
                    }
                    if !ransac_set {
                        self.ransac.inlier_threshold = DEFAULT_TAU_M;
                    }
                }
            }
            _ => {
                return Err(Error::parse(
                    "config",
                    "camera needs all of focal_length, baseline, cx and cy",
                ))
            }
        }
        self.validate()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        if let Some(s) = self.disparity_scale {
            kv("disparity_scale", s.to_string());
        }
        kv("invalid_value", self.invalid_value.to_string());
        kv("fit_stride", self.fit_stride.to_string());
        kv("histogram_bins", self.histogram_bins.to_string());
        kv("threshold_method", self.threshold_method.as_str().into());
        kv("median_radius", self.median_radius.to_string());
        kv("ransac_max_iterations", self.ransac.max_iterations.to_string());
        kv("ransac_threshold", self.ransac.inlier_threshold.to_string());
        kv("ransac_confidence", self.ransac.confidence.to_string());
        kv("ransac_min_sample", self.ransac.min_sample.to_string());
        kv("seed", self.ransac.seed.to_string());
        kv("tau", self.tau.to_string());
        kv("polarity", self.polarity.as_str().into());
        kv("open_radius", self.open_radius.to_string());
        kv("min_region_area", self.min_region_area.to_string());
        kv(
            "connectivity",
            match self.connectivity {
                Connectivity::Four => "4".into(),
                Connectivity::Eight => "8".into(),
            },
        );
        kv("min_disparity", self.min_disparity.to_string());
        if let Some(c) = &self.camera {
            kv("focal_length", c.focal_length.to_string());
            kv("baseline", c.baseline.to_string());
            kv("cx", c.principal_point.0.to_string());
            kv("cy", c.principal_point.1.to_string());
        }
        out
    }
}

/// Splits `key = value` lines, dropping blanks and `#` comments.
pub(crate) fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse("config", format!("line {}: expected key = value", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let cfg = PipelineConfig::from_text(
            "# detection settings\n\
             threshold_method = triangle\n\
             tau = 1.5   # px\n\
             seed = 42\n\
             connectivity = 8\n",
        )
        .unwrap();
        assert_eq!(cfg.threshold_method, ThresholdMethod::Triangle);
        assert_eq!(cfg.tau, 1.5);
        assert_eq!(cfg.ransac.seed, 42);
        assert_eq!(cfg.connectivity, Connectivity::Eight);
        assert!(cfg.camera.is_none());
    }

    #[test]
    fn camera_switches_defaults_to_metres() {
        let cfg = PipelineConfig::from_text("focal_length = 700\nbaseline = 0.12\ncx = 320\ncy = 240\n").unwrap();
        assert_eq!(cfg.tau, DEFAULT_TAU_M);
        assert_eq!(cfg.ransac.inlier_threshold, DEFAULT_TAU_M);
        let cfg =
            PipelineConfig::from_text("focal_length = 700\nbaseline = 0.12\ncx = 320\ncy = 240\ntau = 0.02\n").unwrap();
        assert_eq!(cfg.tau, 0.02);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PipelineConfig::from_text("tau = abc\n").is_err());
        assert!(PipelineConfig::from_text("nonsense = 1\n").is_err());
        assert!(PipelineConfig::from_text("focal_length = 700\n").is_err());
        assert!(PipelineConfig::from_text("ransac_confidence = 1.5\n").is_err());
        assert!(PipelineConfig::from_text("just a line\n").is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = PipelineConfig::metric(CameraModel::new(721.5, 0.54, (609.5, 172.8), 256.0).unwrap());
        cfg.disparity_scale = Some(256.0);
        cfg.threshold_method = ThresholdMethod::Triangle;
        cfg.ransac.seed = 99;
        assert_eq!(PipelineConfig::from_text(&cfg.to_text()).unwrap(), cfg);
        let plain = PipelineConfig::default();
        assert_eq!(PipelineConfig::from_text(&plain.to_text()).unwrap(), plain);
    }
}
