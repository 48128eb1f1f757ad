//! Deterministic synthetic road scenes and independent least-squares oracles.

mod oracle;
mod scene;

pub use oracle::{oracle_planar_fit, oracle_quadratic_fit, PlanarFit};
pub use scene::{detection_suite, generate_scene, GaussianNoise, Pothole, Profile, SceneSpec, SceneTruth};
