use crate::error::{Error, Result};
use crate::imaging::DisparityImage;

/// Row-by-disparity histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct VDisparityMap {
    pub rows: usize,
    pub bins: usize,
    pub bin_width: f64,
    /// `rows × bins`, row-major.
    pub counts: Vec<u64>,
}

impl VDisparityMap {
    pub fn count(&self, v: usize, bin: usize) -> u64 {
        self.counts[v * self.bins + bin]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row(&self, v: usize) -> &[u64] {
        &self.counts[v * self.bins..(v + 1) * self.bins]
    }
}

/// Builds the v-disparity map with enough bins for the largest disparity.
pub fn build_v_disparity(disp: &DisparityImage, bin_width: f64) -> Result<VDisparityMap> {
    check_width(bin_width)?;
    let max = disp
        .iter_valid()
        .map(|(_, _, g)| g)
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::NoValidPixels);
    }
    let bins = (max / bin_width).floor() as usize + 1;
    build_v_disparity_with_bins(disp, bin_width, bins)
}

/// Builds the v-disparity map with a fixed bin count; larger disparities land in the last bin.
pub fn build_v_disparity_with_bins(disp: &DisparityImage, bin_width: f64, bins: usize) -> Result<VDisparityMap> {
    check_width(bin_width)?;
    if bins == 0 {
        return Err(Error::InvalidParameter("v-disparity needs at least one bin".into()));
    }
    if disp.valid_count() == 0 {
        return Err(Error::NoValidPixels);
    }
    let rows = disp.height();
    let mut counts = vec![0u64; rows * bins];
    for (_, v, g) in disp.iter_valid() {
        let bin = ((g / bin_width).floor() as usize).min(bins - 1);
        counts[v * bins + bin] += 1;
    }
    Ok(VDisparityMap {
        rows,
        bins,
        bin_width,
        counts,
    })
}

fn check_width(bin_width: f64) -> Result<()> {
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(Error::InvalidParameter(format!("bin width {bin_width} must be positive")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn single_pixel() {
        let mut valid = vec![false; 8 * 8];
        let mut values = vec![0.0; 64];
        valid[5 * 8 + 3] = true;
        values[5 * 8 + 3] = 10.0;
        let disp = DisparityImage::new(8, 8, values, valid).unwrap();
        let map = build_v_disparity(&disp, 1.0).unwrap();
        assert_eq!(map.count(5, 10), 1);
        assert_eq!(map.total(), 1);
    }

    #[test]
    fn constant_row_lands_in_one_bin() {
        let disp = DisparityImage::from_fn(10, 3, |_, v| 2.0 + v as f64 * 3.0).unwrap();
        let map = build_v_disparity(&disp, 1.0).unwrap();
        for v in 0..3 {
            let row = map.row(v);
            assert_eq!(row.iter().filter(|&&c| c > 0).count(), 1);
            assert_eq!(row[2 + 3 * v], 10);
        }
    }

    #[test]
    fn overflow_clips_to_last_bin() {
        let disp = DisparityImage::from_fn(2, 1, |u, _| if u == 0 { 1.0 } else { 99.0 }).unwrap();
        let map = build_v_disparity_with_bins(&disp, 1.0, 4).unwrap();
        assert_eq!(map.count(0, 3), 1);
        assert_eq!(map.count(0, 1), 1);
    }

    #[test]
    fn matches_naive_accumulation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(16);
        let mut values = Vec::new();
        let mut valid = Vec::new();
        for _ in 0..256 {
            values.push(rng.random_range(0.0..40.0));
            valid.push(rng.random_bool(0.8));
        }
        let disp = DisparityImage::new(16, 16, values.clone(), valid.clone()).unwrap();
        let map = build_v_disparity(&disp, 2.5).unwrap();
        let mut naive = vec![vec![0u64; map.bins]; 16];
        for v in 0..16 {
            for u in 0..16 {
                let i = v * 16 + u;
                if valid[i] {
                    naive[v][(values[i] / 2.5) as usize] += 1;
                }
            }
        }
        for v in 0..16 {
            assert_eq!(map.row(v), naive[v].as_slice());
        }
        assert_eq!(map.total() as usize, disp.valid_count());
    }

    #[test]
    fn rejects_empty_and_bad_width() {
        let disp = DisparityImage::new(2, 2, vec![0.0; 4], vec![false; 4]).unwrap();
        assert!(matches!(build_v_disparity(&disp, 1.0), Err(Error::NoValidPixels)));
        let disp = DisparityImage::from_fn(2, 2, |_, _| 1.0).unwrap();
        assert!(build_v_disparity(&disp, 0.0).is_err());
    }
}
