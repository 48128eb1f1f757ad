use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma};

use super::{BinaryImage, DamageMask, DisparityImage, GrayImage};
use crate::error::{Error, Result};

/// Reads an 8- or 16-bit single-channel disparity raster.
///
/// Each raw value is divided by `scale` (defaults: 256 for 16-bit, 1 for
/// 8-bit). Pixels whose raw value equals `invalid_value` are marked invalid.
pub fn load_disparity(path: impl AsRef<Path>, scale: Option<f64>, invalid_value: u16) -> Result<DisparityImage> {
    let path = path.as_ref();
    if let Some(s) = scale {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParameter(format!("disparity scale {s} must be positive")));
        }
    }
    let (width, height, raw, default_scale) = match open(path)? {
        DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            (w, h, buf.into_raw().into_iter().map(u16::from).collect::<Vec<_>>(), 1.0)
        }
        DynamicImage::ImageLuma16(buf) => {
            let (w, h) = buf.dimensions();
            (w, h, buf.into_raw(), 256.0)
        }
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: expected 8- or 16-bit single channel, found {:?}",
                path.display(),
                other.color()
            )))
        }
    };
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    let scale = scale.unwrap_or(default_scale);
    let valid: Vec<bool> = raw.iter().map(|&r| r != invalid_value).collect();
    let values = raw
        .iter()
        .zip(&valid)
        .map(|(&r, &ok)| if ok { f64::from(r) / scale } else { 0.0 })
        .collect();
    DisparityImage::new(width as usize, height as usize, values, valid)
}

/// Writes a disparity raster as 16-bit with `raw = round(g * scale)`.
///
/// Invalid pixels and values that would round onto `invalid_value` are
/// written as `invalid_value`; values are clamped to the 16-bit range.
pub fn save_disparity(disp: &DisparityImage, path: impl AsRef<Path>, scale: f64, invalid_value: u16) -> Result<()> {
    let raw: Vec<u16> = disp
        .values()
        .iter()
        .zip(disp.validity())
        .map(|(&g, &ok)| {
            if !ok {
                return invalid_value;
            }
            let r = (g * scale).round().clamp(0.0, 65535.0) as u16;
            if r == invalid_value {
                // nudge off the sentinel so the pixel stays valid on reload
                if r == u16::MAX {
                    r - 1
                } else {
                    r + 1
                }
            } else {
                r
            }
        })
        .collect();
    let buf = ImageBuffer::<Luma<u16>, _>::from_raw(disp.width() as u32, disp.height() as u32, raw)
        .expect("raster length matches dimensions");
    save_dynamic(&DynamicImage::ImageLuma16(buf), path.as_ref())
}

/// Writes a real-valued raster as 16-bit with `raw = round(x * scale)`, clamped.
pub fn save_gray(img: &GrayImage, path: impl AsRef<Path>, scale: f64) -> Result<()> {
    let raw: Vec<u16> = img
        .values()
        .iter()
        .map(|&x| (x * scale).round().clamp(0.0, 65535.0) as u16)
        .collect();
    let buf = ImageBuffer::<Luma<u16>, _>::from_raw(img.width() as u32, img.height() as u32, raw)
        .expect("raster length matches dimensions");
    save_dynamic(&DynamicImage::ImageLuma16(buf), path.as_ref())
}

/// Writes `mask` as an 8-bit raster: damaged = 255, background = 0.
pub fn save_mask(mask: &DamageMask, path: impl AsRef<Path>) -> Result<()> {
    let raw: Vec<u8> = mask
        .damaged()
        .data()
        .iter()
        .map(|&d| if d { 255 } else { 0 })
        .collect();
    let buf = ImageBuffer::<Luma<u8>, _>::from_raw(mask.width() as u32, mask.height() as u32, raw)
        .expect("raster length matches dimensions");
    save_dynamic(&DynamicImage::ImageLuma8(buf), path.as_ref())
}

/// Reads a binary raster; any nonzero pixel is set.
///
/// Colour rasters are accepted and reduced to luma, which covers label images
/// stored as RGB.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryImage> {
    let path = path.as_ref();
    let img = open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::EmptyImage);
    }
    let data = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(|x| x != 0).collect(),
        DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(|x| x != 0).collect(),
        other => other.to_luma8().into_raw().into_iter().map(|x| x != 0).collect(),
    };
    BinaryImage::new(w, h, data)
}

fn open(path: &Path) -> Result<DynamicImage> {
    image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })
}

fn save_dynamic(img: &DynamicImage, path: &Path) -> Result<()> {
    let format = ImageFormat::from_path(path).unwrap_or(ImageFormat::Png);
    let tmp = temp_sibling(path);
    img.save_with_format(&tmp, format).map_err(|e| Error::Write {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })?;
    fs::rename(&tmp, path).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `contents` to a temporary sibling of `path`, then renames it into place.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let tmp = temp_sibling(path);
    let wrap = |source| Error::Write {
        path: path.to_path_buf(),
        source,
    };
    fs::write(&tmp, contents).map_err(wrap)?;
    fs::rename(&tmp, path).map_err(wrap)
}

fn temp_sibling(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = format!(".{name}.{}.tmp", std::process::id());
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => dir.join(tmp),
        _ => PathBuf::from(tmp),
    }
}
