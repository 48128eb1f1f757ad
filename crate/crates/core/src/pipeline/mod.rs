//! End-to-end detection, dataset ingestion and evaluation.

mod batch;
mod config;
mod dataset;
mod detect;
mod eval;

pub use batch::{mask_path, run_batch, BatchOutcome};
pub use config::PipelineConfig;
pub use dataset::{load_dataset, DatasetLayout, DatasetListing, DatasetSample};
pub use detect::{detect_from_transformed, detect_potholes, Detection};
pub use eval::{evaluate, write_csv, Confusion, EvalReport, EvalRow, Metrics};
