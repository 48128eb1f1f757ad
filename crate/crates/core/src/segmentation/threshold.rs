use std::cmp::Ordering;
use std::str::FromStr;

use num_bigint::BigInt;

use super::Histogram;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdMethod {
    #[default]
    Otsu,
    Triangle,
}

impl ThresholdMethod {
    pub fn apply(self, hist: &Histogram) -> Result<ThresholdResult> {
        match self {
            ThresholdMethod::Otsu => otsu_threshold(hist),
            ThresholdMethod::Triangle => triangle_threshold(hist),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ThresholdMethod::Otsu => "otsu",
            ThresholdMethod::Triangle => "triangle",
        }
    }
}

impl FromStr for ThresholdMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "otsu" => Ok(Self::Otsu),
            "triangle" => Ok(Self::Triangle),
            other => Err(Error::InvalidParameter(format!("unknown threshold method {other}"))),
        }
    }
}

/// A threshold picked from a histogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    /// Intensity value; pixels strictly below it form the low class.
    pub threshold: f64,
    /// Otsu: first bin of the high class. Triangle: the selected bin.
    pub bin: usize,
    /// Otsu: between-class variance. Triangle: distance from the chord.
    pub criterion: f64,
}

/// Otsu's threshold: the split maximising `w₀w₁(μ₀ − μ₁)²`.
///
/// Splits are compared exactly in integer arithmetic, so equal objectives tie
/// and the lowest split wins.
pub fn otsu_threshold(hist: &Histogram) -> Result<ThresholdResult> {
    if hist.occupied_bins() < 2 {
        return Err(Error::DegenerateHistogram);
    }
    let n = hist.bins();
    let total_n: u64 = hist.counts.iter().sum();
    let total_s: u128 = hist.counts.iter().enumerate().map(|(i, &c)| i as u128 * c as u128).sum();

    // σ²_B(t) ∝ (n₁S₀ − n₀S₁)² / (n₀n₁), compared by cross-multiplication.
    let mut best: Option<(usize, BigInt, BigInt)> = None;
    let (mut n0, mut s0) = (0u64, 0u128);
    for t in 1..n {
        n0 += hist.counts[t - 1];
        s0 += (t as u128 - 1) * hist.counts[t - 1] as u128;
        let n1 = total_n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let s1 = total_s - s0;
        let a = BigInt::from(n1) * BigInt::from(s0) - BigInt::from(n0) * BigInt::from(s1);
        let num = &a * &a;
        let den = BigInt::from(n0) * BigInt::from(n1);
        let better = match &best {
            None => true,
            Some((_, bnum, bden)) => (&num * bden).cmp(&(bnum * &den)) == Ordering::Greater,
        };
        if better {
            best = Some((t, num, den));
        }
    }
    let (t, _, _) = best.ok_or(Error::DegenerateHistogram)?;
    Ok(ThresholdResult {
        threshold: hist.boundary(t),
        bin: t,
        criterion: between_class_variance(hist, t),
    })
}

/// `w₀w₁(μ₀ − μ₁)²` in intensity units for the split before bin `t`.
fn between_class_variance(hist: &Histogram, t: usize) -> f64 {
    let total = hist.counts.iter().sum::<u64>() as f64;
    let (mut n0, mut s0, mut n1, mut s1) = (0.0, 0.0, 0.0, 0.0);
    for (i, &c) in hist.counts.iter().enumerate() {
        let (c, x) = (c as f64, i as f64);
        if i < t {
            n0 += c;
            s0 += c * x;
        } else {
            n1 += c;
            s1 += c * x;
        }
    }
    let d = s0 / n0 - s1 / n1;
    let w = hist.bin_width();
    (n0 / total) * (n1 / total) * d * d * w * w
}

/// Triangle threshold.
///
/// A chord joins the peak to the farthest occupied bin on the longer side of
/// the peak (the low side when both are equally long). The bin whose count
/// lies farthest below that chord is selected, ties resolved toward the tail.
/// For a low-side tail the threshold sits above the selected bin, so the bin
/// itself falls into the low class; for a high-side tail it sits below it.
pub fn triangle_threshold(hist: &Histogram) -> Result<ThresholdResult> {
    if hist.occupied_bins() < 2 {
        return Err(Error::DegenerateHistogram);
    }
    let c = &hist.counts;
    let peak = c
        .iter()
        .enumerate()
        .fold(0, |best, (i, &x)| if x > c[best] { i } else { best });
    let first = c.iter().position(|&x| x > 0).unwrap_or(0);
    let last = c.iter().rposition(|&x| x > 0).unwrap_or(0);
    let low_tail = peak - first >= last - peak;
    let tail = if low_tail { first } else { last };
    let span = peak.abs_diff(tail) as i128;
    let (hp, ht) = (c[peak] as i128, c[tail] as i128);

    // Vertical gap to the chord scaled by `span`; proportional to the perpendicular distance.
    let gap = |i: usize| ht * span + (hp - ht) * i.abs_diff(tail) as i128 - c[i] as i128 * span;
    let candidates: Box<dyn Iterator<Item = usize>> = if low_tail {
        Box::new(tail..peak)
    } else {
        Box::new((peak + 1..=tail).rev())
    };
    let mut best = (tail, gap(tail));
    for i in candidates {
        let g = gap(i);
        if g > best.1 {
            best = (i, g);
        }
    }
    let (bin, g) = best;
    let chord_len = ((span * span + (hp - ht) * (hp - ht)) as f64).sqrt();
    Ok(ThresholdResult {
        threshold: if low_tail { hist.boundary(bin + 1) } else { hist.boundary(bin) },
        bin,
        criterion: g as f64 / chord_len,
    })
}
