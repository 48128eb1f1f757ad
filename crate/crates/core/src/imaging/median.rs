use super::GrayImage;
use crate::error::{Error, Result};

/// Median over the `(2r+1)²` window around each pixel, replicating borders.
pub fn median_filter(img: &GrayImage, radius: usize) -> Result<GrayImage> {
    let (w, h) = img.dims();
    if radius == 0 {
        return Err(Error::InvalidParameter("median radius must be at least 1".into()));
    }
    if radius >= w.min(h) {
        return Err(Error::InvalidParameter(format!(
            "median radius {radius} does not fit a {w}x{h} image"
        )));
    }
    let r = radius as isize;
    let side = 2 * radius + 1;
    let mid = side * side / 2;
    let clamp = |x: isize, n: usize| x.clamp(0, n as isize - 1) as usize;
    let src = img.values();
    let mut window = Vec::with_capacity(side * side);
    let mut out = Vec::with_capacity(w * h);
    for v in 0..h as isize {
        for u in 0..w as isize {
            window.clear();
            for dv in -r..=r {
                let row = clamp(v + dv, h) * w;
                for du in -r..=r {
                    window.push(src[row + clamp(u + du, w)]);
                }
            }
            let (_, m, _) = window.select_nth_unstable_by(mid, f64::total_cmp);
            out.push(*m);
        }
    }
    GrayImage::new(w, h, out)
}
