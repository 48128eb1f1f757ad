use std::collections::VecDeque;

use crate::imaging::BinaryImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    #[default]
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &[(0, -1), (-1, 0), (1, 0), (0, 1)],
            Connectivity::Eight => &[(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionStats {
    pub label: u32,
    pub area: usize,
    /// Inclusive `(u_min, v_min, u_max, v_max)`.
    pub bbox: (usize, usize, usize, usize),
    /// Mean `(u, v)` of the region's pixels.
    pub centroid: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    /// Per-pixel region id, 0 for background.
    pub labels: Vec<u32>,
    pub regions: Vec<RegionStats>,
}

/// Labels connected foreground regions.
///
/// Ids run from 1 in the order each region's first pixel appears in a raster scan.
pub fn connected_components(mask: &BinaryImage, connectivity: Connectivity) -> Labeling {
    let (w, h) = mask.dims();
    let data = mask.data();
    let mut labels = vec![0u32; w * h];
    let mut regions = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !data[start] || labels[start] != 0 {
            continue;
        }
        let label = regions.len() as u32 + 1;
        labels[start] = label;
        queue.push_back(start);
        let mut stats = RegionStats {
            label,
            area: 0,
            bbox: (usize::MAX, usize::MAX, 0, 0),
            centroid: (0.0, 0.0),
        };
        let (mut su, mut sv) = (0.0, 0.0);
        while let Some(i) = queue.pop_front() {
            let (u, v) = (i % w, i / w);
            stats.area += 1;
            su += u as f64;
            sv += v as f64;
            let b = &mut stats.bbox;
            *b = (b.0.min(u), b.1.min(v), b.2.max(u), b.3.max(v));
            for &(du, dv) in connectivity.offsets() {
                let (nu, nv) = (u as isize + du, v as isize + dv);
                if nu < 0 || nv < 0 || nu >= w as isize || nv >= h as isize {
                    continue;
                }
                let j = nv as usize * w + nu as usize;
                if data[j] && labels[j] == 0 {
                    labels[j] = label;
                    queue.push_back(j);
                }
            }
        }
        stats.centroid = (su / stats.area as f64, sv / stats.area as f64);
        regions.push(stats);
    }
    Labeling { labels, regions }
}

/// Clears every region smaller than `min_area` pixels.
pub fn remove_small_regions(mask: &BinaryImage, min_area: usize, connectivity: Connectivity) -> BinaryImage {
    if min_area <= 1 {
        return mask.clone();
    }
    let labeling = connected_components(mask, connectivity);
    let keep: Vec<bool> = labeling.regions.iter().map(|r| r.area >= min_area).collect();
    let data = labeling
        .labels
        .iter()
        .map(|&l| l > 0 && keep[l as usize - 1])
        .collect();
    BinaryImage::new(mask.width(), mask.height(), data).expect("same dimensions")
}
