use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::{write_atomic, BinaryImage};

/// Pixel counts of one prediction against its ground truth.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Metrics with the empty-set conventions: an empty prediction has
    /// precision 1, an empty ground truth has recall 1, and two empty masks
    /// score 1 everywhere.
    pub fn metrics(&self) -> Metrics {
        let (tp, fp, fn_) = (self.tp as f64, self.fp as f64, self.fn_ as f64);
        let precision = if self.tp + self.fp == 0 { 1.0 } else { tp / (tp + fp) };
        let recall = if self.tp + self.fn_ == 0 { 1.0 } else { tp / (tp + fn_) };
        let f_score = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let iou = if self.tp + self.fp + self.fn_ == 0 {
            1.0
        } else {
            tp / (tp + fp + fn_)
        };
        Metrics {
            precision,
            recall,
            f_score,
            iou,
        }
    }
}

impl std::ops::AddAssign for Confusion {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.tn += o.tn;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub iou: f64,
}

/// One image's counts and metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub id: String,
    pub confusion: Confusion,
    pub metrics: Metrics,
}

/// Per-image rows plus the unweighted mean of each metric and summed counts.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn mean(&self) -> Metrics {
        let n = self.rows.len().max(1) as f64;
        let sum = |f: fn(&Metrics) -> f64| self.rows.iter().map(|r| f(&r.metrics)).sum::<f64>() / n;
        Metrics {
            precision: sum(|m| m.precision),
            recall: sum(|m| m.recall),
            f_score: sum(|m| m.f_score),
            iou: sum(|m| m.iou),
        }
    }

    pub fn total_counts(&self) -> Confusion {
        let mut c = Confusion::default();
        for r in &self.rows {
            c += r.confusion;
        }
        c
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("image,precision,recall,f_score,iou,tp,fp,fn,tn\n");
        let mut row = |id: &str, m: &Metrics, c: &Confusion| {
            let _ = writeln!(
                out,
                "{id},{:.6},{:.6},{:.6},{:.6},{},{},{},{}",
                m.precision, m.recall, m.f_score, m.iou, c.tp, c.fp, c.fn_, c.tn
            );
        };
        for r in &self.rows {
            row(&r.id, &r.metrics, &r.confusion);
        }
        row("mean", &self.mean(), &self.total_counts());
        out
    }
}

/// Counts a prediction against ground truth pixel by pixel.
pub fn evaluate(pred: &BinaryImage, gt: &BinaryImage) -> Result<EvalRow> {
    if pred.dims() != gt.dims() {
        return Err(Error::DimensionMismatch {
            expected: gt.dims(),
            actual: pred.dims(),
        });
    }
    let mut c = Confusion::default();
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        match (p, g) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(EvalRow {
        id: String::new(),
        confusion: c,
        metrics: c.metrics(),
    })
}

pub fn write_csv(report: &EvalReport, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), report.to_csv().as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask(bits: &[u8], w: usize) -> BinaryImage {
        BinaryImage::new(w, bits.len() / w, bits.iter().map(|&b| b != 0).collect()).unwrap()
    }

    #[test]
    fn identical_nonempty_masks_score_one() {
        let m = mask(&[0, 1, 1, 0, 1, 0], 3);
        let r = evaluate(&m, &m).unwrap();
        assert_eq!(r.metrics, Metrics { precision: 1.0, recall: 1.0, f_score: 1.0, iou: 1.0 });
    }

    #[test]
    fn complement_scores_zero() {
        let gt = BinaryImage::from_fn(4, 4, |u, _| u < 2);
        let pred = BinaryImage::from_fn(4, 4, |u, _| u >= 2);
        let r = evaluate(&pred, &gt).unwrap();
        assert_eq!(r.confusion.tp, 0);
        assert_eq!(r.metrics.f_score, 0.0);
        assert_eq!(r.metrics.iou, 0.0);
    }

    #[test]
    fn hand_counted_four_by_four() {
        #[rustfmt::skip]
        let gt = mask(&[
            1, 1, 0, 0,
            1, 0, 0, 0,
            0, 0, 0, 0,
            0, 0, 0, 0,
        ], 4);
        #[rustfmt::skip]
        let pred = mask(&[
            1, 1, 1, 0,
            0, 0, 0, 0,
            0, 0, 0, 0,
            0, 0, 0, 0,
        ], 4);
        let r = evaluate(&pred, &gt).unwrap();
        assert_eq!(r.confusion, Confusion { tp: 2, fp: 1, fn_: 1, tn: 12 });
        assert!((r.metrics.precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.metrics.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.metrics.f_score - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.metrics.iou, 0.5);
    }

    #[test]
    fn empty_conventions() {
        let empty = BinaryImage::empty(3, 3);
        let some = BinaryImage::from_fn(3, 3, |u, v| u == v);
        let both = evaluate(&empty, &empty).unwrap().metrics;
        assert_eq!(both, Metrics { precision: 1.0, recall: 1.0, f_score: 1.0, iou: 1.0 });
        let missed = evaluate(&empty, &some).unwrap().metrics;
        assert_eq!(missed, Metrics { precision: 1.0, recall: 0.0, f_score: 0.0, iou: 0.0 });
        let spurious = evaluate(&some, &empty).unwrap().metrics;
        assert_eq!(spurious, Metrics { precision: 0.0, recall: 1.0, f_score: 0.0, iou: 0.0 });
    }

    #[test]
    fn dimension_mismatch() {
        assert!(evaluate(&BinaryImage::empty(3, 3), &BinaryImage::empty(3, 4)).is_err());
    }

    #[test]
    fn csv_layout() {
        let m = mask(&[1, 0, 0, 1], 2);
        let mut a = evaluate(&m, &m).unwrap();
        a.id = "a".into();
        let mut b = evaluate(&BinaryImage::empty(2, 2), &m).unwrap();
        b.id = "b".into();
        let csv = EvalReport { rows: vec![a, b] }.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "image,precision,recall,f_score,iou,tp,fp,fn,tn");
        assert_eq!(lines[1], "a,1.000000,1.000000,1.000000,1.000000,2,0,0,2");
        assert_eq!(lines[2], "b,1.000000,0.000000,0.000000,0.000000,0,0,2,2");
        assert_eq!(lines[3], "mean,1.000000,0.500000,0.500000,0.500000,2,0,2,4");
    }

    proptest! {
        #[test]
        fn counts_cover_every_pixel(
            w in 1usize..20,
            h in 1usize..20,
            seed in any::<u64>(),
        ) {
            let bit = |k: u64| (seed.rotate_left(k as u32 % 64) ^ k.wrapping_mul(0x9E37_79B9)) & 1 == 1;
            let pred = BinaryImage::from_fn(w, h, |u, v| bit((u * 31 + v) as u64));
            let gt = BinaryImage::from_fn(w, h, |u, v| bit((u * 17 + v * 7 + 3) as u64));
            let r = evaluate(&pred, &gt).unwrap();
            prop_assert_eq!(r.confusion.total(), (w * h) as u64);
            let m = r.metrics;
            for x in [m.precision, m.recall, m.f_score, m.iou] {
                prop_assert!((0.0..=1.0).contains(&x));
            }
        }
    }
}
