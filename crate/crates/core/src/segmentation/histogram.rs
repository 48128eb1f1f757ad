use crate::error::{Error, Result};
use crate::imaging::GrayImage;

pub const DEFAULT_BINS: usize = 256;

/// Linear histogram over the observed `[min, max]` of the counted pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub counts: Vec<u64>,
    pub total: u64,
    /// Value range mapped onto the bins; `max` lands in the last bin.
    pub range: (f64, f64),
}

impl Histogram {
    /// Builds a histogram directly from bin counts, e.g. for testing thresholds.
    pub fn from_counts(counts: Vec<u64>, range: (f64, f64)) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
        }
        if !(range.0 <= range.1) {
            return Err(Error::InvalidParameter("histogram range is inverted".into()));
        }
        let total = counts.iter().sum();
        Ok(Self { counts, total, range })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_width(&self) -> f64 {
        (self.range.1 - self.range.0) / self.bins() as f64
    }

    /// Bin holding `x`, clamped into `[0, bins)`.
    pub fn bin_of(&self, x: f64) -> usize {
        let (lo, hi) = self.range;
        if hi <= lo {
            return 0;
        }
        let n = self.bins();
        (((x - lo) / (hi - lo) * n as f64).floor().max(0.0) as usize).min(n - 1)
    }

    /// Value at the lower edge of bin `b` (`b == bins` gives `max`).
    pub fn boundary(&self, b: usize) -> f64 {
        if b >= self.bins() {
            return self.range.1;
        }
        self.range.0 + b as f64 * self.bin_width()
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// 256-bin histogram of the pixels selected by `mask` (all pixels if `None`).
pub fn histogram(img: &GrayImage, mask: Option<&[bool]>) -> Result<Histogram> {
    histogram_with_bins(img, mask, DEFAULT_BINS)
}

pub fn histogram_with_bins(img: &GrayImage, mask: Option<&[bool]>, bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
    }
    let selected = |i: usize| mask.is_none_or(|m| m[i]);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, &x) in img.values().iter().enumerate() {
        if selected(i) {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if !lo.is_finite() {
        return Err(Error::NoValidPixels);
    }
    let mut hist = Histogram {
        counts: vec![0; bins],
        total: 0,
        range: (lo, hi),
    };
    for (i, &x) in img.values().iter().enumerate() {
        if selected(i) {
            let b = hist.bin_of(x);
            hist.counts[b] += 1;
            hist.total += 1;
        }
    }
    Ok(hist)
}
