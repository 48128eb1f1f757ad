use std::f64::consts::FRAC_PI_4;

use super::{RoadDisparityModel, RoadPixelSample};
use crate::error::{Error, Result};

/// Centered second moments of a sample set.
///
/// The roll energy only depends on the samples through these quantities, so
/// each evaluation during the search is O(1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RollMoments {
    pub count: usize,
    pub mean_u: f64,
    pub mean_v: f64,
    pub mean_g: f64,
    pub suu: f64,
    pub svv: f64,
    pub suv: f64,
    pub sug: f64,
    pub svg: f64,
    pub sgg: f64,
    /// Uncentered `gᵀg`.
    pub gtg: f64,
}

impl RollMoments {
    pub fn from_samples(samples: &[RoadPixelSample]) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::InsufficientPoints {
                needed: 3,
                got: samples.len(),
            });
        }
        let n = samples.len() as f64;
        let (mut su, mut sv, mut sg) = (0.0, 0.0, 0.0);
        for s in samples {
            su += s.u;
            sv += s.v;
            sg += s.g;
        }
        let (mu, mv, mg) = (su / n, sv / n, sg / n);
        let mut m = RollMoments {
            count: samples.len(),
            mean_u: mu,
            mean_v: mv,
            mean_g: mg,
            suu: 0.0,
            svv: 0.0,
            suv: 0.0,
            sug: 0.0,
            svg: 0.0,
            sgg: 0.0,
            gtg: 0.0,
        };
        for s in samples {
            let (du, dv, dg) = (s.u - mu, s.v - mv, s.g - mg);
            m.suu += du * du;
            m.svv += dv * dv;
            m.suv += du * dv;
            m.sug += du * dg;
            m.svg += dv * dg;
            m.sgg += dg * dg;
            m.gtg += s.g * s.g;
        }
        Ok(m)
    }

    /// Centered `(tᵀt, tᵀg)` for the rotated coordinate `t = cosΦ·v − sinΦ·u`.
    fn rotated(&self, phi: f64) -> (f64, f64) {
        let (s, c) = phi.sin_cos();
        let stt = c * c * self.svv - 2.0 * s * c * self.suv + s * s * self.suu;
        let stg = c * self.svg - s * self.sug;
        (stt, stg)
    }

    fn spread(&self) -> f64 {
        self.suu + self.svv
    }

    /// Roll energy at `phi`; `None` when `T(Φ)ᵀT(Φ)` is singular.
    pub fn energy(&self, phi: f64) -> Option<f64> {
        let (stt, stg) = self.rotated(phi);
        if !(stt > 1e-12 * self.spread()) {
            return None;
        }
        Some((self.sgg - stg * stg / stt).max(0.0))
    }

    /// dE/dΦ, used to polish the golden-section bracket.
    fn energy_slope(&self, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        let n = c * self.svg - s * self.sug;
        let dn = -s * self.svg - c * self.sug;
        let d = c * c * self.svv - 2.0 * s * c * self.suv + s * s * self.suu;
        let dd = 2.0 * s * c * (self.suu - self.svv) - 2.0 * (c * c - s * s) * self.suv;
        -n * (2.0 * dn * d - n * dd) / (d * d)
    }

    fn check_geometry(&self) -> Result<()> {
        let det = self.suu * self.svv - self.suv * self.suv;
        let scale = self.spread();
        if !(scale > 0.0) || det <= 1e-12 * scale * scale {
            return Err(Error::DegenerateGeometry("road samples are collinear in the image plane"));
        }
        Ok(())
    }
}

/// Residual energy `gᵀg − gᵀT(TᵀT)⁻¹Tᵀg` with `T(Φ) = [1, cosΦ·v − sinΦ·u]`.
pub fn roll_energy(phi: f64, samples: &[RoadPixelSample]) -> Result<f64> {
    RollMoments::from_samples(samples)?
        .energy(phi)
        .ok_or(Error::DegenerateGeometry("singular normal matrix"))
}

/// Search settings for [`fit_roll_angle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RollSearch {
    /// Coarse grid size over `[−π/4, π/4]`.
    pub grid_points: usize,
    /// Golden-section stops once the bracket is narrower than this.
    pub tolerance: f64,
    /// Refine the golden-section result by bisecting on dE/dΦ.
    pub polish: bool,
}

impl Default for RollSearch {
    fn default() -> Self {
        Self {
            grid_points: 181,
            tolerance: 1e-7,
            polish: true,
        }
    }
}

impl RollSearch {
    pub fn minimize(&self, m: &RollMoments) -> Result<f64> {
        m.check_geometry()?;
        let n = self.grid_points.max(3);
        let step = 2.0 * FRAC_PI_4 / (n - 1) as f64;
        let grid: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let phi = -FRAC_PI_4 + step * i as f64;
                (phi, m.energy(phi).unwrap_or(f64::INFINITY))
            })
            .collect();

        let (best, emin) = grid
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &(_, e))| if e < acc.1 { (i, e) } else { acc });
        let emax = grid.iter().map(|&(_, e)| e).filter(|e| e.is_finite()).fold(0.0, f64::max);
        if !emin.is_finite() {
            return Err(Error::DegenerateGeometry("singular normal matrix"));
        }
        if emax - emin <= 1e-12 * m.gtg {
            return Err(Error::FlatEnergy);
        }

        let lo = grid[best.saturating_sub(1)].0;
        let hi = grid[(best + 1).min(n - 1)].0;
        let f = |phi: f64| m.energy(phi).unwrap_or(f64::INFINITY);
        let (a, b) = golden_section(f, lo, hi, self.tolerance);
        let mut phi = 0.5 * (a + b);
        if self.polish {
            if let Some(root) = polish_root(m, lo, hi) {
                // near a perfect fit both energies are rounding noise of size ~eps·Sgg
                if f(root) <= f(phi) + 1e-12 * m.sgg {
                    phi = root;
                }
            }
        }
        Ok(phi)
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a, b)
}

/// Bisects dE/dΦ over the grid bracket; `None` if it has no sign change.
///
/// The slope stays accurate where the energy itself has flattened into
/// rounding noise, so this pins the minimiser of a near-perfect fit.
fn polish_root(m: &RollMoments, mut lo: f64, mut hi: f64) -> Option<f64> {
    if !(m.energy_slope(lo) < 0.0 && m.energy_slope(hi) > 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if m.energy_slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Roll angle minimising [`roll_energy`] over `[−π/4, π/4]`.
pub fn fit_roll_angle(samples: &[RoadPixelSample]) -> Result<f64> {
    RollSearch::default().minimize(&RollMoments::from_samples(samples)?)
}

/// Fits `(Φ, κ, ϰ)` to road samples. `lambda` is left at 0.
pub fn fit_model(samples: &[RoadPixelSample]) -> Result<RoadDisparityModel> {
    let m = RollMoments::from_samples(samples)?;
    let phi = RollSearch::default().minimize(&m)?;
    model_at(&m, phi)
}

/// Solves the 2×2 least-squares problem for `x = ϰ (κ, 1)` at a fixed roll angle.
pub(crate) fn model_at(m: &RollMoments, phi: f64) -> Result<RoadDisparityModel> {
    let (stt, stg) = m.rotated(phi);
    if !(stt > 1e-12 * m.spread()) {
        return Err(Error::DegenerateGeometry("singular normal matrix"));
    }
    let varkappa = stg / stt;
    if varkappa.abs() < 1e-12 {
        return Err(Error::VarkappaZero);
    }
    let (s, c) = phi.sin_cos();
    let mean_t = c * m.mean_v - s * m.mean_u;
    let intercept = m.mean_g - varkappa * mean_t;
    Ok(RoadDisparityModel::new(phi, intercept / varkappa, varkappa))
}
