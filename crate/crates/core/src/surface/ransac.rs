use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{fit_quadratic_surface, QuadraticSurface, SurfaceFrame, SurfacePoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacConfig {
    pub max_iterations: usize,
    /// Inlier band `|y − f(x, z)| ≤ inlier_threshold`, in the units of `y`.
    pub inlier_threshold: f64,
    /// Probability of drawing at least one all-inlier sample.
    pub confidence: f64,
    pub min_sample: usize,
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            inlier_threshold: 0.04,
            confidence: 0.999,
            min_sample: 6,
            seed: 0,
        }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidParameter("RANSAC confidence must lie in (0, 1)".into()));
        }
        if !(self.inlier_threshold > 0.0 && self.inlier_threshold.is_finite()) {
            return Err(Error::InvalidParameter("RANSAC inlier threshold must be positive".into()));
        }
        if self.min_sample < 6 {
            return Err(Error::InvalidParameter("RANSAC minimal sample must be at least 6".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("RANSAC needs at least one iteration".into()));
        }
        Ok(())
    }

    /// Iterations needed to reach `confidence` at inlier ratio `w`.
    fn required_iterations(&self, w: f64) -> usize {
        let p_good = w.powi(self.min_sample as i32);
        if p_good >= 1.0 {
            return 1;
        }
        if p_good <= 0.0 {
            return self.max_iterations;
        }
        let n = (1.0 - self.confidence).ln() / (1.0 - p_good).ln();
        if n.is_finite() {
            (n.ceil().max(1.0) as usize).min(self.max_iterations)
        } else {
            self.max_iterations
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub surface: QuadraticSurface,
    /// Consensus set of the best hypothesis, on which `surface` was refit.
    /// Parallel to the input points.
    pub inliers: Vec<bool>,
    pub rms_residual: f64,
    pub iterations_used: usize,
}

impl FitReport {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|&&b| b).count()
    }

    /// UTF-8 `key = value` report.
    pub fn to_text(&self) -> String {
        let s = &self.surface;
        let mut out = String::new();
        let _ = writeln!(out, "frame = {}", s.frame.as_str());
        for (i, a) in s.a.iter().enumerate() {
            let _ = writeln!(out, "a{i} = {a:.16e}");
        }
        let _ = writeln!(out, "center_x = {:.16e}", s.conditioning.center.0);
        let _ = writeln!(out, "center_z = {:.16e}", s.conditioning.center.1);
        let _ = writeln!(out, "scale_x = {:.16e}", s.conditioning.scale.0);
        let _ = writeln!(out, "scale_z = {:.16e}", s.conditioning.scale.1);
        let _ = writeln!(out, "points = {}", self.inliers.len());
        let _ = writeln!(out, "inliers = {}", self.inlier_count());
        let _ = writeln!(out, "rms_residual = {:.16e}", self.rms_residual);
        let _ = writeln!(out, "iterations = {}", self.iterations_used);
        out
    }
}

// Hypotheses are scored in batches in parallel, then scanned in iteration
// order so the adaptive stop and the winner never depend on scheduling.
const BATCH: usize = 32;

struct Hypothesis {
    surface: QuadraticSurface,
    count: usize,
}

/// Hypothesize-and-verify quadratic fit.
///
/// Iteration `i` draws its sample from a ChaCha8 stream `(seed, i)`, so the
/// result is fixed by the seed and the point order.
pub fn ransac_fit(points: &[SurfacePoint], frame: SurfaceFrame, cfg: &RansacConfig) -> Result<FitReport> {
    cfg.validate()?;
    let n = points.len();
    if n < cfg.min_sample {
        return Err(Error::InsufficientPoints {
            needed: cfg.min_sample,
            got: n,
        });
    }

    let hypothesize = |i: usize| -> Option<Hypothesis> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        let sample: Vec<SurfacePoint> = rand::seq::index::sample(&mut rng, n, cfg.min_sample)
            .into_iter()
            .map(|k| points[k])
            .collect();
        let surface = fit_quadratic_surface(&sample, frame).ok()?;
        let count = points
            .iter()
            .filter(|p| surface.residual(p).abs() <= cfg.inlier_threshold)
            .count();
        Some(Hypothesis { surface, count })
    };

    let mut best: Option<Hypothesis> = None;
    let mut needed = cfg.max_iterations;
    let mut used = 0;
    'outer: while used < needed {
        let end = (used + BATCH).min(needed);
        let batch: Vec<Option<Hypothesis>> = (used..end).into_par_iter().map(hypothesize).collect();
        for h in batch {
            used += 1;
            if let Some(h) = h {
                if best.as_ref().is_none_or(|b| h.count > b.count) {
                    needed = cfg.required_iterations(h.count as f64 / n as f64).max(used);
                    best = Some(h);
                }
            }
            if used >= needed {
                break 'outer;
            }
        }
    }

    let required = 2 * cfg.min_sample;
    let best = best.ok_or(Error::NoConsensus { best: 0, required })?;
    if best.count < required {
        return Err(Error::NoConsensus {
            best: best.count,
            required,
        });
    }
    let inliers: Vec<bool> = points
        .iter()
        .map(|p| best.surface.residual(p).abs() <= cfg.inlier_threshold)
        .collect();
    let consensus: Vec<SurfacePoint> = points
        .iter()
        .zip(&inliers)
        .filter(|(_, &ok)| ok)
        .map(|(p, _)| *p)
        .collect();
    let surface = fit_quadratic_surface(&consensus, frame)?;
    let sum_sq: f64 = consensus.iter().map(|p| surface.residual(p).powi(2)).sum();
    Ok(FitReport {
        surface,
        inliers,
        rms_residual: (sum_sq / consensus.len() as f64).sqrt(),
        iterations_used: used,
    })
}
