//! 3-D reconstruction, quadratic road-surface fitting and residual-based
//! damage extraction.
//!
//! A road surface is modeled as `y = f(x, z) = a₀ + a₁x + a₂z + a₃x² + a₄z² + a₅xz`.
//! In the metric frame `(x, z, y) = (X, Z, Y)` of the camera (Y pointing down);
//! in the image frame `(x, z, y) = (u, v, g)` with `g` the raw disparity.

mod cloud;
mod damage;
mod quadratic;
mod ransac;

pub use cloud::{disparity_to_pointcloud, project, read_ply, write_ply, Point3, PointCloud3D};
pub use damage::{extract_damage, DamageInput, DamageParams, Polarity};
pub use quadratic::{
    fit_quadratic_surface, normal_equations_design, normal_equations_power_sums, Conditioning, NormalEquations,
    QuadraticSurface, SurfaceFrame, SurfacePoint,
};
pub use ransac::{ransac_fit, FitReport, RansacConfig};
