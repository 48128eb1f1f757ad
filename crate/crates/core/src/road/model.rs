use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::{write_atomic, PixelCoord};

/// Roll angle and projection coefficients of the road-disparity model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadDisparityModel {
    /// Stereo-rig roll angle in radians.
    pub phi: f64,
    /// Offset coefficient κ: the road disparity vanishes where `cosΦ·v − sinΦ·u = −κ`.
    pub kappa: f64,
    /// Disparity gain ϰ in pixels of disparity per rotated row.
    pub varkappa: f64,
    /// Offset added after subtracting the model so transformed values are non-negative.
    pub lambda: f64,
}

impl RoadDisparityModel {
    pub fn new(phi: f64, kappa: f64, varkappa: f64) -> Self {
        Self {
            phi,
            kappa,
            varkappa,
            lambda: 0.0,
        }
    }

    /// Expected road disparity at `(u, v)`.
    pub fn predict(&self, u: f64, v: f64) -> f64 {
        let (s, c) = self.phi.sin_cos();
        self.varkappa * (-s * u + c * v + self.kappa)
    }

    pub fn predict_pixel(&self, p: PixelCoord) -> f64 {
        self.predict(p.u as f64, p.v as f64)
    }

    /// The 3×3 matrix mapping `(u, v, 1)` to `(g, v, 1)`.
    pub fn projection_matrix(&self) -> [[f64; 3]; 3] {
        let (s, c) = self.phi.sin_cos();
        let k = self.varkappa;
        [[-k * s, k * c, k * self.kappa], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, value) in [
            ("phi_rad", self.phi),
            ("kappa", self.kappa),
            ("varkappa", self.varkappa),
            ("lambda", self.lambda),
        ] {
            let _ = writeln!(out, "{key} = {value:.16e}");
        }
        out
    }
}

/// Parses the `key = value` text written by [`RoadDisparityModel::to_text`].
pub fn parse_model(text: &str) -> Result<RoadDisparityModel> {
    let mut fields: [Option<f64>; 4] = [None; 4];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse("road model", format!("line {}: expected key = value", lineno + 1)))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::parse("road model", format!("line {}: bad number", lineno + 1)))?;
        let slot = match key.trim() {
            "phi_rad" => 0,
            "kappa" => 1,
            "varkappa" => 2,
            "lambda" => 3,
            other => return Err(Error::parse("road model", format!("unknown key {other}"))),
        };
        fields[slot] = Some(value);
    }
    match fields {
        [Some(phi), Some(kappa), Some(varkappa), Some(lambda)] => Ok(RoadDisparityModel {
            phi,
            kappa,
            varkappa,
            lambda,
        }),
        _ => Err(Error::parse("road model", "missing one of phi_rad, kappa, varkappa, lambda")),
    }
}

pub fn save_model(model: &RoadDisparityModel, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, model.to_text().as_bytes())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<RoadDisparityModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_roll_ignores_column() {
        let m = RoadDisparityModel::new(0.0, 2.0, 0.5);
        for u in [0.0, 7.0, 1000.0] {
            assert_eq!(m.predict(u, 10.0), 6.0);
        }
    }

    #[test]
    fn single_surviving_term() {
        let m = RoadDisparityModel::new(PI / 6.0, 0.0, 1.0);
        assert!((m.predict(2.0, 0.0) + 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn predict_matches_matrix_product(
            phi in -0.7f64..0.7, kappa in -50.0f64..50.0, varkappa in 0.01f64..2.0,
            u in 0.0f64..2000.0, v in 0.0f64..2000.0,
        ) {
            let m = RoadDisparityModel::new(phi, kappa, varkappa);
            let mat = m.projection_matrix();
            let p = [u, v, 1.0];
            let q: Vec<f64> = mat.iter().map(|row| row.iter().zip(&p).map(|(a, b)| a * b).sum()).collect();
            let g = m.predict(u, v);
            prop_assert!((q[0] - g).abs() <= 1e-9 * (1.0 + g.abs()));
            prop_assert_eq!(q[1], v);
            prop_assert_eq!(q[2], 1.0);
        }

        #[test]
        fn text_round_trip_is_exact(
            phi in -0.7f64..0.7, kappa in -1e4f64..1e4, varkappa in -3.0f64..3.0, lambda in 0.0f64..100.0,
        ) {
            let m = RoadDisparityModel { phi, kappa, varkappa, lambda };
            prop_assert_eq!(parse_model(&m.to_text()).unwrap(), m);
        }
    }

    #[test]
    fn text_has_enough_digits() {
        let m = RoadDisparityModel::new(0.1, 1.0 / 3.0, 0.04);
        let text = m.to_text();
        let kappa_line = text.lines().find(|l| l.starts_with("kappa")).unwrap();
        let mantissa = kappa_line.split('=').nth(1).unwrap().trim().split('e').next().unwrap();
        assert!(mantissa.chars().filter(|c| c.is_ascii_digit()).count() >= 12);
    }

    #[test]
    fn parse_rejects_incomplete() {
        assert!(parse_model("phi_rad = 0.1\nkappa = 2\n").is_err());
        assert!(parse_model("phi_rad = x\n").is_err());
    }
}
