//! Python bindings: `import pothole`.
//!
//! Rasters cross the boundary as flat row-major lists together with their
//! width and height.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use pothole_core::imaging::{self, BinaryImage};
use pothole_core::pipeline::{self, EvalRow};
use pothole_core::road;
use pothole_core::segmentation::{otsu_threshold as otsu, triangle_threshold as triangle, Histogram};
use pothole_core::surface::{self, RansacConfig, SurfaceFrame, SurfacePoint};
use pothole_core::synth;

create_exception!(pothole, PotholeError, PyException);

fn err(e: pothole_core::Error) -> PyErr {
    PotholeError::new_err(e.to_string())
}

/// Dense disparity raster with a validity mask.
#[pyclass(name = "DisparityImage", module = "pothole", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDisparity(imaging::DisparityImage);

#[pymethods]
impl PyDisparity {
    #[new]
    #[pyo3(signature = (width, height, values, valid=None))]
    fn new(width: usize, height: usize, values: Vec<f64>, valid: Option<Vec<bool>>) -> PyResult<Self> {
        let valid = valid.unwrap_or_else(|| vec![true; values.len()]);
        imaging::DisparityImage::new(width, height, values, valid).map(Self).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (path, scale=None, invalid_value=0))]
    fn load(path: &str, scale: Option<f64>, invalid_value: u16) -> PyResult<Self> {
        imaging::load_disparity(path, scale, invalid_value).map(Self).map_err(err)
    }

    #[pyo3(signature = (path, scale=256.0, invalid_value=0))]
    fn save(&self, path: &str, scale: f64, invalid_value: u16) -> PyResult<()> {
        imaging::save_disparity(&self.0, path, scale, invalid_value).map_err(err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    fn validity(&self) -> Vec<bool> {
        self.0.validity().to_vec()
    }

    fn get(&self, u: usize, v: usize) -> Option<f64> {
        self.0.get(u, v)
    }

    fn __repr__(&self) -> String {
        format!("DisparityImage({}x{}, {} valid)", self.0.width(), self.0.height(), self.0.valid_count())
    }
}

#[pyclass(name = "RoadDisparityModel", module = "pothole", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModel(road::RoadDisparityModel);

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (phi, kappa, varkappa, lambda_=0.0))]
    fn new(phi: f64, kappa: f64, varkappa: f64, lambda_: f64) -> Self {
        Self(road::RoadDisparityModel {
            lambda: lambda_,
            ..road::RoadDisparityModel::new(phi, kappa, varkappa)
        })
    }

    #[getter]
    fn phi(&self) -> f64 {
        self.0.phi
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.0.kappa
    }

    #[getter]
    fn varkappa(&self) -> f64 {
        self.0.varkappa
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.0.lambda
    }

    fn predict(&self, u: f64, v: f64) -> f64 {
        self.0.predict(u, v)
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    fn __repr__(&self) -> String {
        format!(
            "RoadDisparityModel(phi={}, kappa={}, varkappa={}, lambda_={})",
            self.0.phi, self.0.kappa, self.0.varkappa, self.0.lambda
        )
    }
}

/// Tunables of `detect_potholes`, read from `key = value` text.
#[pyclass(name = "PipelineConfig", module = "pothole", skip_from_py_object)]
#[derive(Clone)]
struct PyConfig(pipeline::PipelineConfig);

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (text=None))]
    fn new(text: Option<&str>) -> PyResult<Self> {
        match text {
            Some(t) => pipeline::PipelineConfig::from_text(t).map(Self).map_err(err),
            None => Ok(Self(pipeline::PipelineConfig::default())),
        }
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        pipeline::PipelineConfig::from_file(path).map(Self).map_err(err)
    }

    /// Overrides one key, e.g. `cfg.set("tau", "1.5")`.
    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        self.0.apply_pairs(&[(key.to_string(), value.to_string())]).map_err(err)
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }
}

/// Quadratic surface fit from `ransac_fit` or `detect_potholes`.
#[pyclass(name = "FitReport", module = "pothole", frozen)]
struct PyFit(surface::FitReport);

#[pymethods]
impl PyFit {
    #[getter]
    fn coefficients(&self) -> [f64; 6] {
        self.0.surface.a
    }

    #[getter]
    fn frame(&self) -> &'static str {
        self.0.surface.frame.as_str()
    }

    #[getter]
    fn inliers(&self) -> Vec<bool> {
        self.0.inliers.clone()
    }

    #[getter]
    fn inlier_count(&self) -> usize {
        self.0.inlier_count()
    }

    #[getter]
    fn rms_residual(&self) -> f64 {
        self.0.rms_residual
    }

    #[getter]
    fn iterations_used(&self) -> usize {
        self.0.iterations_used
    }

    fn evaluate(&self, x: f64, z: f64) -> f64 {
        self.0.surface.evaluate(x, z)
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }
}

#[pyclass(name = "Detection", module = "pothole", frozen)]
struct PyDetection {
    inner: pipeline::Detection,
}

#[pymethods]
impl PyDetection {
    #[getter]
    fn width(&self) -> usize {
        self.inner.mask.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.mask.height()
    }

    /// Flat row-major damage mask.
    #[getter]
    fn mask(&self) -> Vec<bool> {
        self.inner.mask.damaged().data().to_vec()
    }

    #[getter]
    fn damaged_count(&self) -> usize {
        self.inner.mask.damaged_count()
    }

    /// `(label, area, (u_min, v_min, u_max, v_max), (cu, cv))` per region.
    #[getter]
    fn regions(&self) -> Vec<(u32, usize, (usize, usize, usize, usize), (f64, f64))> {
        self.inner
            .mask
            .regions()
            .iter()
            .map(|r| (r.label, r.area, r.bbox, r.centroid))
            .collect()
    }

    #[getter]
    fn model(&self) -> PyModel {
        PyModel(self.inner.model)
    }

    #[getter]
    fn threshold(&self) -> f64 {
        self.inner.threshold.threshold
    }

    #[getter]
    fn fit(&self) -> PyFit {
        PyFit(self.inner.fit.clone())
    }

    fn transformed(&self) -> Vec<f64> {
        self.inner.transformed.image.values().to_vec()
    }

    fn save_mask(&self, path: &str) -> PyResult<()> {
        imaging::save_mask(&self.inner.mask, path).map_err(err)
    }
}

#[pyfunction]
#[pyo3(signature = (disparity, stride=1))]
fn fit_model(disparity: &PyDisparity, stride: usize) -> PyResult<PyModel> {
    road::fit_model(&road::road_samples(&disparity.0, stride.max(1)))
        .map(PyModel)
        .map_err(err)
}

/// Returns `(values, validity, model)` with `model.lambda_` set.
#[pyfunction]
fn transform_disparity(disparity: &PyDisparity, model: &PyModel) -> (Vec<f64>, Vec<bool>, PyModel) {
    let t = road::transform_disparity(&disparity.0, &model.0);
    (t.image.values().to_vec(), t.valid, PyModel(t.model))
}

#[pyfunction]
#[pyo3(signature = (disparity, config=None))]
fn detect_potholes(py: Python<'_>, disparity: &PyDisparity, config: Option<&PyConfig>) -> PyResult<PyDetection> {
    let cfg = config.map(|c| c.0.clone()).unwrap_or_default();
    let disp = disparity.0.clone();
    py.detach(move || pipeline::detect_potholes(&disp, &cfg))
        .map(|inner| PyDetection { inner })
        .map_err(err)
}

/// Fits `y = f(x, z)` to `(x, z, y)` triples.
#[pyfunction]
#[pyo3(signature = (points, frame="metric-xz", inlier_threshold=0.04, confidence=0.999, max_iterations=1000, seed=0))]
fn ransac_fit(
    points: Vec<(f64, f64, f64)>,
    frame: &str,
    inlier_threshold: f64,
    confidence: f64,
    max_iterations: usize,
    seed: u64,
) -> PyResult<PyFit> {
    let frame = match frame {
        "metric-xz" => SurfaceFrame::MetricXZ,
        "image-uv" => SurfaceFrame::ImageUV,
        other => return Err(PotholeError::new_err(format!("unknown frame {other:?}"))),
    };
    let pts: Vec<SurfacePoint> = points.into_iter().map(|(x, z, y)| SurfacePoint::new(x, z, y)).collect();
    let cfg = RansacConfig {
        inlier_threshold,
        confidence,
        max_iterations,
        seed,
        ..RansacConfig::default()
    };
    surface::ransac_fit(&pts, frame, &cfg).map(PyFit).map_err(err)
}

/// `(threshold, bin)` for a histogram spanning `range`.
#[pyfunction]
#[pyo3(signature = (counts, range=None, method="otsu"))]
fn threshold(counts: Vec<u64>, range: Option<(f64, f64)>, method: &str) -> PyResult<(f64, usize)> {
    let range = range.unwrap_or((0.0, counts.len() as f64));
    let hist = Histogram::from_counts(counts, range).map_err(err)?;
    let r = match method {
        "otsu" => otsu(&hist),
        "triangle" => triangle(&hist),
        other => return Err(PotholeError::new_err(format!("unknown method {other:?}"))),
    }
    .map_err(err)?;
    Ok((r.threshold, r.bin))
}

fn row_dict<'py>(py: Python<'py>, row: &EvalRow) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let d = pyo3::types::PyDict::new(py);
    let (c, m) = (&row.confusion, &row.metrics);
    d.set_item("precision", m.precision)?;
    d.set_item("recall", m.recall)?;
    d.set_item("f_score", m.f_score)?;
    d.set_item("iou", m.iou)?;
    d.set_item("tp", c.tp)?;
    d.set_item("fp", c.fp)?;
    d.set_item("fn", c.fn_)?;
    d.set_item("tn", c.tn)?;
    Ok(d)
}

/// Pixel metrics of a flat prediction mask against flat ground truth.
#[pyfunction]
fn evaluate<'py>(
    py: Python<'py>,
    pred: Vec<bool>,
    gt: Vec<bool>,
    width: usize,
    height: usize,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let pred = BinaryImage::new(width, height, pred).map_err(err)?;
    let gt = BinaryImage::new(width, height, gt).map_err(err)?;
    let row = pipeline::evaluate(&pred, &gt).map_err(err)?;
    row_dict(py, &row)
}

/// The standard synthetic detection suite: `[(disparity, gt_mask), ...]`.
#[pyfunction]
#[pyo3(signature = (count=10, seed=0, roll=0.0))]
fn synth_suite(count: usize, seed: u64, roll: f64) -> PyResult<Vec<(PyDisparity, Vec<bool>)>> {
    synth::detection_suite(count, seed, roll)
        .iter()
        .map(|spec| {
            let scene = synth::generate_scene(spec).map_err(err)?;
            Ok((PyDisparity(scene.disparity), scene.gt_mask.into_data()))
        })
        .collect()
}

/// Noise-free (or noisy) road with the given model and no damage.
#[pyfunction]
#[pyo3(signature = (width, height, phi, kappa, varkappa, noise_sigma=0.0, seed=0))]
fn synth_road(
    width: usize,
    height: usize,
    phi: f64,
    kappa: f64,
    varkappa: f64,
    noise_sigma: f64,
    seed: u64,
) -> PyResult<PyDisparity> {
    let mut spec = synth::SceneSpec::road(width, height, phi, kappa, varkappa);
    spec.noise_sigma = noise_sigma;
    spec.seed = seed;
    synth::generate_scene(&spec).map(|s| PyDisparity(s.disparity)).map_err(err)
}

/// Runs the command-line tool with `args` (without the program name).
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    pothole_core::cli::run_cli(std::iter::once("pothole".to_string()).chain(args))
}

#[pymodule]
fn pothole(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PotholeError", m.py().get_type::<PotholeError>())?;
    m.add_class::<PyDisparity>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyFit>()?;
    m.add_class::<PyDetection>()?;
    m.add_function(wrap_pyfunction!(fit_model, m)?)?;
    m.add_function(wrap_pyfunction!(transform_disparity, m)?)?;
    m.add_function(wrap_pyfunction!(detect_potholes, m)?)?;
    m.add_function(wrap_pyfunction!(ransac_fit, m)?)?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(synth_suite, m)?)?;
    m.add_function(wrap_pyfunction!(synth_road, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
