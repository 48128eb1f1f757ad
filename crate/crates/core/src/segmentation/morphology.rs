use crate::imaging::BinaryImage;

/// Binary erosion with a `(2r+1)²` square; border pixels are replicated.
pub fn erode(mask: &BinaryImage, radius: usize) -> BinaryImage {
    box_filter(mask, radius, |count, window| count == window)
}

/// Binary dilation with a `(2r+1)²` square; border pixels are replicated.
pub fn dilate(mask: &BinaryImage, radius: usize) -> BinaryImage {
    box_filter(mask, radius, |count, _| count > 0)
}

/// Erosion followed by dilation. A radius of 0 returns the mask unchanged.
pub fn morphological_open(mask: &BinaryImage, radius: usize) -> BinaryImage {
    if radius == 0 {
        return mask.clone();
    }
    dilate(&erode(mask, radius), radius)
}

// Replicating the border makes the clamped window equal to the box clipped to
// the image, so both passes reduce to counting set pixels in a clipped 1-D run.
fn box_filter(mask: &BinaryImage, radius: usize, keep: impl Fn(usize, usize) -> bool + Copy) -> BinaryImage {
    let (w, h) = mask.dims();
    let rows = pass(mask.data(), w, h, radius, keep, true);
    let data = pass(&rows, w, h, radius, keep, false);
    BinaryImage::new(w, h, data).expect("same dimensions")
}

fn pass(src: &[bool], w: usize, h: usize, r: usize, keep: impl Fn(usize, usize) -> bool, horizontal: bool) -> Vec<bool> {
    let (len, lines) = if horizontal { (w, h) } else { (h, w) };
    let index = |line: usize, k: usize| if horizontal { line * w + k } else { k * w + line };
    let mut out = vec![false; w * h];
    let mut prefix = vec![0usize; len + 1];
    for line in 0..lines {
        for k in 0..len {
            prefix[k + 1] = prefix[k] + usize::from(src[index(line, k)]);
        }
        for k in 0..len {
            let lo = k.saturating_sub(r);
            let hi = (k + r + 1).min(len);
            out[index(line, k)] = keep(prefix[hi] - prefix[lo], hi - lo);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(mask: &BinaryImage, r: usize, erode: bool) -> BinaryImage {
        let (w, h) = mask.dims();
        BinaryImage::from_fn(w, h, |u, v| {
            let mut all = true;
            let mut any = false;
            for dv in -(r as i64)..=r as i64 {
                for du in -(r as i64)..=r as i64 {
                    let uu = (u as i64 + du).clamp(0, w as i64 - 1) as usize;
                    let vv = (v as i64 + dv).clamp(0, h as i64 - 1) as usize;
                    all &= mask.get(uu, vv);
                    any |= mask.get(uu, vv);
                }
            }
            if erode {
                all
            } else {
                any
            }
        })
    }

    #[test]
    fn isolated_pixel_is_removed() {
        let mask = BinaryImage::from_fn(9, 9, |u, v| u == 4 && v == 4);
        assert_eq!(morphological_open(&mask, 1).count(), 0);
    }

    #[test]
    fn solid_block_survives() {
        let mask = BinaryImage::from_fn(20, 20, |u, v| (5..15).contains(&u) && (5..15).contains(&v));
        assert_eq!(morphological_open(&mask, 1), mask);
    }

    #[test]
    fn block_touching_border_survives() {
        let mask = BinaryImage::from_fn(12, 12, |u, v| u < 2 && v < 6);
        assert_eq!(morphological_open(&mask, 1), mask);
    }

    proptest! {
        #[test]
        fn matches_brute_force(bits in prop::collection::vec(prop::bool::weighted(0.6), 18 * 14), r in 1usize..4) {
            let mask = BinaryImage::new(18, 14, bits).unwrap();
            let e = brute(&mask, r, true);
            prop_assert_eq!(&erode(&mask, r), &e);
            prop_assert_eq!(&dilate(&mask, r), &brute(&mask, r, false));
            prop_assert_eq!(morphological_open(&mask, r), brute(&e, r, false));
        }

        #[test]
        fn opening_is_idempotent_and_bounded(bits in prop::collection::vec(prop::bool::weighted(0.6), 16 * 16), r in 1usize..3) {
            let mask = BinaryImage::new(16, 16, bits).unwrap();
            let once = morphological_open(&mask, r);
            prop_assert_eq!(&morphological_open(&once, r), &once);
            let d = dilate(&mask, r);
            prop_assert!(once.data().iter().zip(d.data()).all(|(a, b)| !a || *b));
            prop_assert!(once.data().iter().zip(mask.data()).all(|(a, b)| !a || *b));
        }
    }
}
