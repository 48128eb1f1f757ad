//! Least-squares solvers that share no code with the production fitting
//! paths. They exist to cross-check those paths in tests.

use crate::error::{Error, Result};
use crate::road::RoadPixelSample;
use crate::surface::SurfacePoint;

/// Unconstrained planar fit `g ≈ a + b·v + c·u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Residual sum of squares.
    pub rss: f64,
}

impl PlanarFit {
    /// Roll angle implied by the plane, `atan(−c/b)`.
    pub fn roll(&self) -> f64 {
        (-self.c / self.b).atan()
    }
}

/// Planar least squares by sequential Givens rotations.
///
/// Each row `(1, v, u | g)` is rotated into a running upper-triangular factor;
/// whatever is left of `g` after the three eliminations is pure residual.
pub fn oracle_planar_fit(samples: &[RoadPixelSample]) -> Result<PlanarFit> {
    if samples.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            got: samples.len(),
        });
    }
    let mut r = [[0.0f64; 4]; 3];
    let mut rss = 0.0;
    for s in samples {
        let mut row = [1.0, s.v, s.u, s.g];
        for k in 0..3 {
            if row[k] == 0.0 {
                continue;
            }
            let (a, b) = (r[k][k], row[k]);
            let h = a.hypot(b);
            let (c, sn) = (a / h, b / h);
            for j in k..4 {
                let (x, y) = (r[k][j], row[j]);
                r[k][j] = c * x + sn * y;
                row[j] = -sn * x + c * y;
            }
        }
        rss += row[3] * row[3];
    }
    let scale = r.iter().map(|row| row[0].abs().max(row[1].abs()).max(row[2].abs())).fold(0.0, f64::max);
    if (0..3).any(|k| r[k][k].abs() <= 1e-10 * scale) {
        return Err(Error::DegenerateGeometry("planar oracle is rank deficient"));
    }
    let mut x = [0.0; 3];
    for k in (0..3).rev() {
        let mut acc = r[k][3];
        for j in k + 1..3 {
            acc -= r[k][j] * x[j];
        }
        x[k] = acc / r[k][k];
    }
    Ok(PlanarFit {
        a: x[0],
        b: x[1],
        c: x[2],
        rss,
    })
}

/// Quadratic-surface least squares by Householder QR on the raw design matrix.
pub fn oracle_quadratic_fit(points: &[SurfacePoint]) -> Result<[f64; 6]> {
    const N: usize = 6;
    let m = points.len();
    if m < N {
        return Err(Error::InsufficientPoints { needed: N, got: m });
    }
    // column-major copy of [W | y]
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(m); N + 1];
    for p in points {
        let row = [1.0, p.x, p.z, p.x * p.x, p.z * p.z, p.x * p.z, p.y];
        for (c, v) in cols.iter_mut().zip(row) {
            c.push(v);
        }
    }
    let col_norm = |c: &[f64]| c.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = cols[..N].iter().map(|c| col_norm(c)).fold(0.0, f64::max);
    for k in 0..N {
        let alpha = {
            let norm = col_norm(&cols[k][k..]);
            if norm <= 1e-12 * scale {
                return Err(Error::DegenerateGeometry("quadratic oracle is rank deficient"));
            }
            if cols[k][k] > 0.0 {
                -norm
            } else {
                norm
            }
        };
        let mut v: Vec<f64> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        for c in cols.iter_mut().skip(k) {
            let dot: f64 = v.iter().zip(&c[k..]).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vnorm2;
            for (ci, vi) in c[k..].iter_mut().zip(&v) {
                *ci -= f * vi;
            }
        }
    }
    let mut a = [0.0; N];
    for k in (0..N).rev() {
        let mut acc = cols[N][k];
        for j in k + 1..N {
            acc -= cols[j][k] * a[j];
        }
        a[k] = acc / cols[k][k];
    }
    Ok(a)
}
