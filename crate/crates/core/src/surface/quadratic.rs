use crate::error::{Error, Result};
use crate::linalg::cholesky_solve;

/// Coordinate frame a surface was fitted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceFrame {
    /// `y = Y(X, Z)` in metres.
    MetricXZ,
    /// `g = g(u, v)` in pixels.
    ImageUV,
}

impl SurfaceFrame {
    pub fn as_str(self) -> &'static str {
        match self {
            SurfaceFrame::MetricXZ => "metric-xz",
            SurfaceFrame::ImageUV => "image-uv",
        }
    }
}

/// One fitting observation: the surface predicts `y` from `(x, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub x: f64,
    pub z: f64,
    pub y: f64,
}

impl SurfacePoint {
    pub fn new(x: f64, z: f64, y: f64) -> Self {
        Self { x, z, y }
    }
}

/// Affine map `x' = (x − center) / scale` applied per axis before solving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conditioning {
    pub center: (f64, f64),
    pub scale: (f64, f64),
}

impl Conditioning {
    pub const IDENTITY: Conditioning = Conditioning {
        center: (0.0, 0.0),
        scale: (1.0, 1.0),
    };

    /// Centers at the mean and scales by the standard deviation of each axis.
    pub fn from_points(points: &[SurfacePoint]) -> Self {
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.x).sum::<f64>() / n;
        let mz = points.iter().map(|p| p.z).sum::<f64>() / n;
        let vx = points.iter().map(|p| (p.x - mx).powi(2)).sum::<f64>() / n;
        let vz = points.iter().map(|p| (p.z - mz).powi(2)).sum::<f64>() / n;
        let sd = |v: f64| if v > 0.0 { v.sqrt() } else { 1.0 };
        Self {
            center: (mx, mz),
            scale: (sd(vx), sd(vz)),
        }
    }

    pub fn apply(&self, p: &SurfacePoint) -> SurfacePoint {
        SurfacePoint {
            x: (p.x - self.center.0) / self.scale.0,
            z: (p.z - self.center.1) / self.scale.1,
            y: p.y,
        }
    }

    /// Rewrites coefficients fitted in the conditioned frame for the original frame.
    pub fn decondition(&self, b: &[f64; 6]) -> [f64; 6] {
        // x' = αx + β, z' = γz + δ
        let (alpha, gamma) = (1.0 / self.scale.0, 1.0 / self.scale.1);
        let (beta, delta) = (-self.center.0 * alpha, -self.center.1 * gamma);
        [
            b[0] + b[1] * beta + b[2] * delta + b[3] * beta * beta + b[4] * delta * delta + b[5] * beta * delta,
            alpha * (b[1] + 2.0 * b[3] * beta + b[5] * delta),
            gamma * (b[2] + 2.0 * b[4] * delta + b[5] * beta),
            b[3] * alpha * alpha,
            b[4] * gamma * gamma,
            b[5] * alpha * gamma,
        ]
    }
}

/// `f(x, z) = a₀ + a₁x + a₂z + a₃x² + a₄z² + a₅xz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticSurface {
    /// Coefficients in the original frame.
    pub a: [f64; 6],
    pub frame: SurfaceFrame,
    pub conditioning: Conditioning,
    /// Coefficients in the conditioned frame, as solved.
    pub conditioned: [f64; 6],
}

impl QuadraticSurface {
    pub fn from_coefficients(a: [f64; 6], frame: SurfaceFrame) -> Self {
        Self {
            a,
            frame,
            conditioning: Conditioning::IDENTITY,
            conditioned: a,
        }
    }

    pub fn evaluate(&self, x: f64, z: f64) -> f64 {
        let a = &self.a;
        a[0] + a[1] * x + a[2] * z + a[3] * x * x + a[4] * z * z + a[5] * x * z
    }

    pub fn residual(&self, p: &SurfacePoint) -> f64 {
        p.y - self.evaluate(p.x, p.z)
    }
}

fn basis(x: f64, z: f64) -> [f64; 6] {
    [1.0, x, z, x * x, z * z, x * z]
}

/// `M a = q` for the least-squares surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalEquations {
    pub m: [[f64; 6]; 6],
    pub q: [f64; 6],
}

impl NormalEquations {
    /// Solves `M a = q` by Cholesky.
    pub fn solve(&self) -> Result<[f64; 6]> {
        cholesky_solve(&self.m, &self.q, 1e-12).ok_or(Error::DegenerateGeometry(
            "points do not determine a unique quadratic surface",
        ))
    }
}

/// Assembles `M = WᵀW`, `q = Wᵀy` from the design matrix rows `(1, x, z, x², z², xz)`.
pub fn normal_equations_design(points: &[SurfacePoint]) -> NormalEquations {
    let mut m = [[0.0; 6]; 6];
    let mut q = [0.0; 6];
    for p in points {
        let w = basis(p.x, p.z);
        for i in 0..6 {
            q[i] += w[i] * p.y;
            for j in i..6 {
                m[i][j] += w[i] * w[j];
            }
        }
    }
    for i in 0..6 {
        for j in 0..i {
            m[i][j] = m[j][i];
        }
    }
    NormalEquations { m, q }
}

/// Assembles `M` and `q` entry by entry from power sums `S_{XᵃZᵇ}` and `S_{YXᵃZᵇ}`.
pub fn normal_equations_power_sums(points: &[SurfacePoint]) -> NormalEquations {
    // s[a][b] = Σ xᵃzᵇ for a + b ≤ 4; t[a][b] = Σ y xᵃzᵇ for a + b ≤ 2
    let mut s = [[0.0; 5]; 5];
    let mut t = [[0.0; 3]; 3];
    for p in points {
        let xp = [1.0, p.x, p.x * p.x, p.x * p.x * p.x, p.x * p.x * p.x * p.x];
        let zp = [1.0, p.z, p.z * p.z, p.z * p.z * p.z, p.z * p.z * p.z * p.z];
        for a in 0..5 {
            for b in 0..5 - a {
                s[a][b] += xp[a] * zp[b];
            }
        }
        for a in 0..3 {
            for b in 0..3 - a {
                t[a][b] += p.y * xp[a] * zp[b];
            }
        }
    }
    let k = s[0][0];
    let m = [
        [k, s[1][0], s[0][1], s[2][0], s[0][2], s[1][1]],
        [s[1][0], s[2][0], s[1][1], s[3][0], s[1][2], s[2][1]],
        [s[0][1], s[1][1], s[0][2], s[2][1], s[0][3], s[1][2]],
        [s[2][0], s[3][0], s[2][1], s[4][0], s[2][2], s[3][1]],
        [s[0][2], s[1][2], s[0][3], s[2][2], s[0][4], s[1][3]],
        [s[1][1], s[2][1], s[1][2], s[3][1], s[1][3], s[2][2]],
    ];
    let q = [t[0][0], t[1][0], t[0][1], t[2][0], t[0][2], t[1][1]];
    NormalEquations { m, q }
}

/// Least-squares quadratic surface through `points`.
///
/// Inputs are centered and scaled per axis, the normal equations are solved
/// by Cholesky, and the coefficients are mapped back to the original frame.
pub fn fit_quadratic_surface(points: &[SurfacePoint], frame: SurfaceFrame) -> Result<QuadraticSurface> {
    if points.len() < 6 {
        return Err(Error::InsufficientPoints {
            needed: 6,
            got: points.len(),
        });
    }
    if points.iter().any(|p| !(p.x.is_finite() && p.z.is_finite() && p.y.is_finite())) {
        return Err(Error::InvalidParameter("surface points must be finite".into()));
    }
    let cond = Conditioning::from_points(points);
    let local: Vec<SurfacePoint> = points.iter().map(|p| cond.apply(p)).collect();
    let b = normal_equations_design(&local).solve()?;
    Ok(QuadraticSurface {
        a: cond.decondition(&b),
        frame,
        conditioning: cond,
        conditioned: b,
    })
}
