use std::fmt::Write as _;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imaging::{BinaryImage, DisparityImage};
use crate::road::RoadDisparityModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Profile {
    /// Constant depth inside the radius.
    #[default]
    Flat,
    /// `depth · (1 − r²/R²)` inside the radius.
    Parabolic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pothole {
    /// `(u, v)` in pixels.
    pub center: (f64, f64),
    pub radius: f64,
    /// Disparity drop at the deepest point, in pixels.
    pub depth: f64,
    pub profile: Profile,
}

impl Pothole {
    fn depth_at(&self, u: f64, v: f64) -> f64 {
        let r2 = (u - self.center.0).powi(2) + (v - self.center.1).powi(2);
        let rr = self.radius * self.radius;
        if r2 > rr {
            return 0.0;
        }
        match self.profile {
            Profile::Flat => self.depth,
            Profile::Parabolic => self.depth * (1.0 - r2 / rr),
        }
    }
}

/// Parameters of a generated scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub phi_star: f64,
    pub kappa_star: f64,
    pub varkappa_star: f64,
    pub noise_sigma: f64,
    pub potholes: Vec<Pothole>,
    pub seed: u64,
    /// When set, pixels whose noise-free road disparity is below this value
    /// are marked invalid (beyond the horizon). When unset every pixel is
    /// valid and a negative disparity is an error.
    pub horizon_margin: Option<f64>,
}

impl SceneSpec {
    pub fn road(width: usize, height: usize, phi: f64, kappa: f64, varkappa: f64) -> Self {
        Self {
            width,
            height,
            phi_star: phi,
            kappa_star: kappa,
            varkappa_star: varkappa,
            noise_sigma: 0.0,
            potholes: Vec::new(),
            seed: 0,
            horizon_margin: None,
        }
    }

    pub fn model(&self) -> RoadDisparityModel {
        RoadDisparityModel::new(self.phi_star, self.kappa_star, self.varkappa_star)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::EmptyImage);
        }
        if !(self.varkappa_star > 0.0) {
            return Err(Error::InvalidParameter("varkappa_star must be positive".into()));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidParameter("noise sigma must be non-negative".into()));
        }
        for p in &self.potholes {
            let (cu, cv) = p.center;
            let inside = cu - p.radius >= 0.0
                && cv - p.radius >= 0.0
                && cu + p.radius <= (self.width - 1) as f64
                && cv + p.radius <= (self.height - 1) as f64;
            if !inside || !(p.radius > 0.0) {
                return Err(Error::InvalidParameter(format!("pothole at {:?} leaves the image", p.center)));
            }
            if !(p.depth > 0.0) {
                return Err(Error::InvalidParameter("pothole depth must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "width = {}", self.width);
        let _ = writeln!(out, "height = {}", self.height);
        let _ = writeln!(out, "phi_rad = {:.16e}", self.phi_star);
        let _ = writeln!(out, "kappa = {:.16e}", self.kappa_star);
        let _ = writeln!(out, "varkappa = {:.16e}", self.varkappa_star);
        let _ = writeln!(out, "noise_sigma = {:.16e}", self.noise_sigma);
        let _ = writeln!(out, "seed = {}", self.seed);
        for (i, p) in self.potholes.iter().enumerate() {
            let profile = match p.profile {
                Profile::Flat => "flat",
                Profile::Parabolic => "parabolic",
            };
            let _ = writeln!(
                out,
                "pothole{i} = {} {} {} {} {profile}",
                p.center.0, p.center.1, p.radius, p.depth
            );
        }
        out
    }
}

/// Standard normal deviates from a ChaCha8 stream via the Box–Muller cosine branch.
///
/// Each deviate consumes two 64-bit words: `u₁ = (w₁ >> 11 + 1)·2⁻⁵³ ∈ (0, 1]`,
/// `u₂ = (w₂ >> 11)·2⁻⁵³ ∈ [0, 1)`, and `z = √(−2 ln u₁)·cos(2π u₂)`.
pub struct GaussianNoise {
    rng: ChaCha8Rng,
}

impl GaussianNoise {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn sample(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * SCALE;
        let u2 = (self.rng.next_u64() >> 11) as f64 * SCALE;
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// A generated scene with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneTruth {
    pub disparity: DisparityImage,
    /// Pixels pushed down by at least half their pothole's nominal depth.
    pub gt_mask: BinaryImage,
    /// Generating parameters (`lambda` = 0).
    pub model: RoadDisparityModel,
}

/// Renders `G(u, v) = road(u, v) + σ·n(u, v) − pothole(u, v)`.
///
/// One deviate is drawn per pixel in raster order, valid or not, so the noise
/// field depends only on the seed and the image size.
pub fn generate_scene(spec: &SceneSpec) -> Result<SceneTruth> {
    spec.validate()?;
    let model = spec.model();
    let (w, h) = (spec.width, spec.height);
    let mut noise = GaussianNoise::new(spec.seed);
    let mut values = Vec::with_capacity(w * h);
    let mut valid = Vec::with_capacity(w * h);
    let mut gt = Vec::with_capacity(w * h);
    for v in 0..h {
        for u in 0..w {
            let n = noise.sample();
            let (uf, vf) = (u as f64, v as f64);
            let road = model.predict(uf, vf);
            let in_view = spec.horizon_margin.is_none_or(|m| road >= m);
            if !in_view {
                values.push(0.0);
                valid.push(false);
                gt.push(false);
                continue;
            }
            let mut drop = 0.0;
            let mut marked = false;
            for p in &spec.potholes {
                let d = p.depth_at(uf, vf);
                drop = f64::max(drop, d);
                marked |= d >= 0.5 * p.depth;
            }
            let g = road + spec.noise_sigma * n - drop;
            if !(g >= 0.0) {
                return Err(Error::NegativeDisparity { u, v });
            }
            values.push(g);
            valid.push(true);
            gt.push(marked);
        }
    }
    Ok(SceneTruth {
        disparity: DisparityImage::new(w, h, values, valid)?,
        gt_mask: BinaryImage::new(w, h, gt)?,
        model,
    })
}

/// Scenes with two flat potholes (areas ≈ 400 and 900 px, depth 6 px) and
/// σ = 0.3 px noise on a 320×240 road; odd-numbered scenes carry a roll.
pub fn detection_suite(count: usize, seed: u64, roll: f64) -> Vec<SceneSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (320usize, 240usize);
    let radii = [(400.0 / std::f64::consts::PI).sqrt(), (900.0 / std::f64::consts::PI).sqrt()];
    (0..count)
        .map(|i| {
            let phi = if i % 2 == 1 { roll } else { 0.0 };
            let mut potholes: Vec<Pothole> = Vec::new();
            for &r in &radii {
                // keep the two footprints well apart
                let center = loop {
                    let c = (
                        rng.random_range(r + 4.0..w as f64 - r - 4.0),
                        rng.random_range(110.0..h as f64 - r - 4.0),
                    );
                    let clear = potholes.iter().all(|p| {
                        let d = ((c.0 - p.center.0).powi(2) + (c.1 - p.center.1).powi(2)).sqrt();
                        d > p.radius + r + 10.0
                    });
                    if clear {
                        break c;
                    }
                };
                potholes.push(Pothole {
                    center,
                    radius: r,
                    depth: 6.0,
                    profile: Profile::Flat,
                });
            }
            SceneSpec {
                width: w,
                height: h,
                phi_star: phi,
                kappa_star: 40.0,
                varkappa_star: 0.1,
                noise_sigma: 0.3,
                potholes,
                seed: rng.next_u64(),
                horizon_margin: None,
            }
        })
        .collect()
}
