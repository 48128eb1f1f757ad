//! The `pothole` command-line interface.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::imaging::{
    load_disparity, load_mask, save_disparity, save_gray, save_mask, write_atomic, BinaryImage,
};
use crate::pipeline::{
    detect_potholes, evaluate, load_dataset, run_batch, write_csv, DatasetLayout, EvalReport, PipelineConfig,
};
use crate::road::{fit_model, road_samples, save_model, transform_disparity};
use crate::surface::{disparity_to_pointcloud, ransac_fit, read_ply, write_ply, SurfaceFrame, SurfacePoint};
use crate::synth::{detection_suite, generate_scene};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "pothole", version, about = "Road pothole detection from disparity images")]
struct Cli {
    /// Seed for every random choice; overrides `seed` in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct ConfigArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set tau=1.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit the road model and write the transformed disparity.
    Transform {
        #[arg(long)]
        disparity: PathBuf,
        /// Transformed raster (16-bit PNG).
        #[arg(long)]
        out: PathBuf,
        /// Model file; defaults to `<out>.model.txt`.
        #[arg(long)]
        model_out: Option<PathBuf>,
        /// Raw units per pixel in the output raster.
        #[arg(long, default_value_t = 256.0)]
        out_scale: f64,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Fit a quadratic road surface with RANSAC and write the fit report.
    FitSurface {
        /// Disparity raster; fitted in the image frame unless a camera is configured.
        #[arg(long, conflicts_with = "ply", required_unless_present = "ply")]
        disparity: Option<PathBuf>,
        /// ASCII PLY cloud; fitted in the metric frame.
        #[arg(long)]
        ply: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the reconstructed cloud (requires a camera).
        #[arg(long)]
        cloud_out: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Detect potholes; writes the mask plus `.model.txt` and `.fit.txt` sidecars.
    Detect {
        #[arg(long)]
        disparity: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Score prediction masks against ground truth masks matched by stem.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// CSV destination.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate synthetic road scenes with ground truth.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Roll angle in radians applied to odd-numbered scenes.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        roll: f64,
    },
    /// Detect and evaluate every sample of a dataset.
    Batch {
        #[arg(long)]
        root: PathBuf,
        /// stereo-potholes, pothole600 or flat-pairs.
        #[arg(long, default_value = "stereo-potholes")]
        layout: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

enum Failure {
    Usage(String),
    Processing(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Processing(e)
    }
}

type CliResult = Result<(), Failure>;

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Processing(e)) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn load_config(args: &ConfigArgs, seed: Option<u64>) -> Result<PipelineConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => PipelineConfig::from_file(path).map_err(|e| Failure::Usage(e.to_string()))?,
        None => PipelineConfig::default(),
    };
    let mut pairs = Vec::new();
    for o in &args.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got {o:?}")))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(s) = seed {
        pairs.push(("seed".into(), s.to_string()));
    }
    cfg.apply_pairs(&pairs).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

/// `dir/name.png` → `dir/name.<suffix>`.
fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn dispatch(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Transform {
            disparity,
            out,
            model_out,
            out_scale,
            cfg,
        } => {
            let cfg = load_config(cfg, cli.seed)?;
            if !(*out_scale > 0.0) {
                return Err(Failure::Usage("--out-scale must be positive".into()));
            }
            let disp = load_disparity(disparity, cfg.disparity_scale, cfg.invalid_value)?;
            let model = fit_model(&road_samples(&disp, cfg.fit_stride.max(1)))?;
            let t = transform_disparity(&disp, &model);
            save_gray(&t.image, out, *out_scale)?;
            let model_path = model_out.clone().unwrap_or_else(|| sidecar(out, "model.txt"));
            save_model(&t.model, model_path)?;
        }
        Command::FitSurface {
            disparity,
            ply,
            out,
            cloud_out,
            cfg,
        } => {
            let cfg = load_config(cfg, cli.seed)?;
            let (points, frame): (Vec<SurfacePoint>, _) = match (disparity, ply) {
                (Some(path), _) => {
                    let disp = load_disparity(path, cfg.disparity_scale, cfg.invalid_value)?;
                    match &cfg.camera {
                        Some(cam) => {
                            let cloud = disparity_to_pointcloud(&disp, cam, cfg.min_disparity)?;
                            if let Some(p) = cloud_out {
                                write_ply(&cloud.points, p)?;
                            }
                            let pts = cloud.points.iter().map(|p| SurfacePoint::new(p.x, p.z, p.y)).collect();
                            (pts, SurfaceFrame::MetricXZ)
                        }
                        None => {
                            if cloud_out.is_some() {
                                return Err(Failure::Usage("--cloud-out needs a camera in the config".into()));
                            }
                            let pts = disp
                                .iter_valid()
                                .map(|(u, v, g)| SurfacePoint::new(u as f64, v as f64, g))
                                .collect();
                            (pts, SurfaceFrame::ImageUV)
                        }
                    }
                }
                (None, Some(path)) => {
                    let pts = read_ply(path)?.iter().map(|p| SurfacePoint::new(p.x, p.z, p.y)).collect();
                    (pts, SurfaceFrame::MetricXZ)
                }
                (None, None) => return Err(Failure::Usage("give --disparity or --ply".into())),
            };
            let report = ransac_fit(&points, frame, &cfg.ransac)?;
            write_atomic(out, report.to_text().as_bytes())?;
        }
        Command::Detect { disparity, out, cfg } => {
            let cfg = load_config(cfg, cli.seed)?;
            let disp = load_disparity(disparity, cfg.disparity_scale, cfg.invalid_value)?;
            let det = detect_potholes(&disp, &cfg)?;
            save_mask(&det.mask, out)?;
            save_model(&det.model, sidecar(out, "model.txt"))?;
            write_atomic(sidecar(out, "fit.txt"), det.fit.to_text().as_bytes())?;
            log::info!(
                "{}: {} damaged pixels in {} regions",
                disparity.display(),
                det.mask.damaged_count(),
                det.mask.regions().len()
            );
        }
        Command::Eval { pred, gt, out } => {
            let report = eval_dirs(pred, gt)?;
            write_csv(&report, out)?;
        }
        Command::Synth { out, count, roll } => {
            std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
            for (i, spec) in detection_suite(*count, cli.seed.unwrap_or(0), *roll).iter().enumerate() {
                let scene = generate_scene(spec)?;
                let base = out.join(format!("scene_{i:03}"));
                save_disparity(&scene.disparity, with_suffix(&base, "_disp.png"), 256.0, 0)?;
                let gt = crate::imaging::DamageMask::from_binary(scene.gt_mask, Default::default());
                save_mask(&gt, with_suffix(&base, "_gt.png"))?;
                write_atomic(with_suffix(&base, "_truth.txt"), spec.to_text().as_bytes())?;
            }
        }
        Command::Batch { root, layout, out, cfg } => {
            let layout: DatasetLayout = layout.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
            let cfg = load_config(cfg, cli.seed)?;
            let listing = load_dataset(root, layout)?;
            for w in &listing.warnings {
                eprintln!("warning: {w}");
            }
            let outcome = run_batch(&listing.samples, &cfg, out)?;
            let mean = outcome.report.mean();
            println!(
                "{} samples, {} failed; mean precision {:.6} recall {:.6} f_score {:.6} iou {:.6}",
                listing.samples.len(),
                outcome.failures.len(),
                mean.precision,
                mean.recall,
                mean.f_score,
                mean.iou
            );
            if let Some((id, e)) = outcome.failures.into_iter().next() {
                eprintln!("error: {id}: {e}");
                return Err(Failure::Processing(e));
            }
        }
    }
    Ok(())
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

const MASK_SUFFIXES: &[&str] = &["_mask", "_pred", "_gt", "_label"];
const INPUT_SUFFIXES: &[&str] = &["_disp", "_tdisp", "_rgb"];

/// Mask PNGs of `dir` keyed by stem with any mask suffix removed. Input
/// rasters (`_disp`, `_tdisp`, `_rgb`) are skipped; when two files share a
/// key, the one whose suffix comes first in `preferred` wins.
fn masks_by_stem(dir: &Path, preferred: &[&str]) -> Result<BTreeMap<String, PathBuf>, Failure> {
    let rank = |suffix: Option<&str>| match suffix {
        Some(s) => preferred.iter().position(|p| *p == s).unwrap_or(preferred.len()),
        None => preferred.len() + 1,
    };
    let mut found: BTreeMap<String, (usize, PathBuf)> = BTreeMap::new();
    let mut entries = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        entries.push(entry.map_err(|e| Error::io(dir, e))?.path());
    }
    entries.sort();
    for path in entries {
        let is_png = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if !path.is_file() || !is_png {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()).map(str::to_string) else {
            continue;
        };
        if INPUT_SUFFIXES.iter().any(|s| stem.ends_with(s)) {
            continue;
        }
        let suffix = MASK_SUFFIXES.iter().copied().find(|s| stem.ends_with(s));
        let key = suffix.map_or(stem.as_str(), |s| &stem[..stem.len() - s.len()]).to_string();
        let r = rank(suffix);
        if found.get(&key).is_none_or(|(best, _)| r < *best) {
            found.insert(key, (r, path));
        }
    }
    Ok(found.into_iter().map(|(k, (_, p))| (k, p)).collect())
}

fn eval_dirs(pred_dir: &Path, gt_dir: &Path) -> Result<EvalReport, Failure> {
    let preds = masks_by_stem(pred_dir, &["_mask", "_pred"])?;
    let gts = masks_by_stem(gt_dir, &["_gt", "_label"])?;
    let mut rows = Vec::new();
    for (stem, pred_path) in &preds {
        let Some(gt_path) = gts.get(stem) else {
            eprintln!("warning: {}: no ground truth, skipped", pred_path.display());
            continue;
        };
        let pred: BinaryImage = load_mask(pred_path)?;
        let gt = load_mask(gt_path)?;
        let mut row = evaluate(&pred, &gt)?;
        row.id = stem.clone();
        rows.push(row);
    }
    for (stem, gt_path) in &gts {
        if !preds.contains_key(stem) {
            eprintln!("warning: {}: no prediction, skipped", gt_path.display());
        }
    }
    if rows.is_empty() {
        return Err(Failure::Processing(Error::InvalidParameter(format!(
            "no prediction in {} matches a ground truth in {}",
            pred_dir.display(),
            gt_dir.display()
        ))));
    }
    Ok(EvalReport { rows })
}
