use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::{write_atomic, CameraModel, DisparityImage, PixelCoord};

/// Camera-frame point in metres: X right, Y down, Z forward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Reconstructed road points and the pixels they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud3D {
    pub points: Vec<Point3>,
    pub source_pixel: Vec<PixelCoord>,
    /// Dimensions of the originating raster.
    pub width: usize,
    pub height: usize,
}

impl PointCloud3D {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Back-projects every valid pixel with `g ≥ min_disparity`.
pub fn disparity_to_pointcloud(disp: &DisparityImage, cam: &CameraModel, min_disparity: f64) -> Result<PointCloud3D> {
    cam.validate()?;
    if !(min_disparity > 0.0) {
        return Err(Error::InvalidParameter("min_disparity must be positive".into()));
    }
    let (cx, cy) = cam.principal_point;
    let fb = cam.focal_length * cam.baseline;
    let mut points = Vec::new();
    let mut source_pixel = Vec::new();
    for (u, v, g) in disp.iter_valid() {
        if g < min_disparity {
            continue;
        }
        let z = fb / g;
        points.push(Point3 {
            x: (u as f64 - cx) * z / cam.focal_length,
            y: (v as f64 - cy) * z / cam.focal_length,
            z,
        });
        source_pixel.push(PixelCoord::new(u, v));
    }
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(PointCloud3D {
        points,
        source_pixel,
        width: disp.width(),
        height: disp.height(),
    })
}

/// Projects a camera-frame point to `(u, v, g)`.
pub fn project(p: &Point3, cam: &CameraModel) -> (f64, f64, f64) {
    let f = cam.focal_length;
    let (cx, cy) = cam.principal_point;
    (f * p.x / p.z + cx, f * p.y / p.z + cy, f * cam.baseline / p.z)
}

/// Writes an ASCII PLY with one `x y z` line per vertex.
pub fn write_ply(points: &[Point3], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::with_capacity(64 + points.len() * 48);
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", points.len());
    out.push_str("property double x\nproperty double y\nproperty double z\nend_header\n");
    for p in points {
        let _ = writeln!(out, "{:e} {:e} {:e}", p.x, p.y, p.z);
    }
    write_atomic(path, out.as_bytes())
}

/// Reads vertices from an ASCII PLY; the first three vertex properties are taken as x y z.
pub fn read_ply(path: impl AsRef<Path>) -> Result<Vec<Point3>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ctx = path.display().to_string();
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(Error::parse(ctx, "missing ply magic"));
    }
    let mut count = None;
    for line in lines.by_ref() {
        let mut words = line.split_whitespace();
        match words.next() {
            Some("format") => {
                if words.next() != Some("ascii") {
                    return Err(Error::parse(ctx, "only ascii PLY is supported"));
                }
            }
            Some("element") => {
                if words.next() == Some("vertex") {
                    let n = words.next().and_then(|w| w.parse::<usize>().ok());
                    count = Some(n.ok_or_else(|| Error::parse(ctx.clone(), "bad vertex count"))?);
                }
            }
            Some("end_header") => break,
            _ => {}
        }
    }
    let count = count.ok_or_else(|| Error::parse(ctx.clone(), "no vertex element"))?;
    let mut points = Vec::with_capacity(count);
    for line in lines.take(count) {
        let xyz: Vec<f64> = line
            .split_whitespace()
            .take(3)
            .map(|w| w.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(ctx.clone(), format!("bad vertex line {line:?}")))?;
        if xyz.len() < 3 {
            return Err(Error::parse(ctx, format!("short vertex line {line:?}")));
        }
        points.push(Point3 {
            x: xyz[0],
            y: xyz[1],
            z: xyz[2],
        });
    }
    if points.len() != count {
        return Err(Error::parse(ctx, "fewer vertices than declared"));
    }
    Ok(points)
}
