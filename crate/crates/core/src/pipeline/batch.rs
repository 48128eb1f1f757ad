use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imaging::{load_disparity, load_mask, save_mask, DamageMask, GrayImage};

use super::{detect_from_transformed, detect_potholes, evaluate, write_csv, DatasetSample, EvalReport, EvalRow, PipelineConfig};

/// Per-sample results of [`run_batch`], in listing order.
#[derive(Debug)]
pub struct BatchOutcome {
    pub report: EvalReport,
    /// Samples that could not be processed, with the reason.
    pub failures: Vec<(String, Error)>,
    pub csv_path: PathBuf,
}

/// Mask file written for a sample id.
pub fn mask_path(out_dir: &Path, id: &str) -> PathBuf {
    out_dir.join(format!("{}_mask.png", id.replace('/', "__")))
}

/// Detects and scores every sample independently, writing one mask per
/// sample and `eval.csv` into `out_dir`.
pub fn run_batch(samples: &[DatasetSample], cfg: &PipelineConfig, out_dir: &Path) -> Result<BatchOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let results: Vec<Result<EvalRow>> = samples.par_iter().map(|s| process(s, cfg, out_dir)).collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (s, r) in samples.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                log::error!("{}: {e}", s.id);
                failures.push((s.id.clone(), e));
            }
        }
    }
    let report = EvalReport { rows };
    let csv_path = out_dir.join("eval.csv");
    write_csv(&report, &csv_path)?;
    Ok(BatchOutcome {
        report,
        failures,
        csv_path,
    })
}

fn process(sample: &DatasetSample, cfg: &PipelineConfig, out_dir: &Path) -> Result<EvalRow> {
    let gt = load_mask(&sample.label)?;
    let mask: DamageMask = match (&sample.disparity, &sample.transformed) {
        (Some(path), _) => {
            let disp = load_disparity(path, cfg.disparity_scale, cfg.invalid_value)?;
            detect_potholes(&disp, cfg)?.mask
        }
        (None, Some(path)) => {
            let t = load_disparity(path, cfg.disparity_scale, cfg.invalid_value)?;
            let (w, h) = t.dims();
            let img = GrayImage::new(w, h, t.values().to_vec())?;
            detect_from_transformed(&img, t.validity(), cfg)?.0
        }
        (None, None) => return Err(Error::InvalidParameter(format!("{}: no input raster", sample.id))),
    };
    save_mask(&mask, mask_path(out_dir, &sample.id))?;
    let mut row = evaluate(mask.damaged(), &gt)?;
    row.id = sample.id.clone();
    Ok(row)
}
