use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

/// How samples are arranged under a dataset root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetLayout {
    /// Folders holding `disp/`, `label/` and optionally `rgb/`, `tdisp/`
    /// subdirectories, paired by file stem. Searched recursively, so several
    /// subsets under one root are enumerated together.
    StereoPotholes,
    /// Like [`StereoPotholes`](Self::StereoPotholes) with `tdisp/` in place of
    /// `disp/`.
    Pothole600,
    /// One flat directory of `<stem>_disp.<ext>` next to `<stem>_gt.<ext>` or
    /// `<stem>_label.<ext>`.
    FlatPairs,
}

impl DatasetLayout {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetLayout::StereoPotholes => "stereo-potholes",
            DatasetLayout::Pothole600 => "pothole600",
            DatasetLayout::FlatPairs => "flat-pairs",
        }
    }
}

impl FromStr for DatasetLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stereo-potholes" => Ok(DatasetLayout::StereoPotholes),
            "pothole600" | "pothole-600" => Ok(DatasetLayout::Pothole600),
            "flat-pairs" => Ok(DatasetLayout::FlatPairs),
            other => Err(Error::UnknownLayout(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSample {
    /// Root-relative identifier, `/`-separated.
    pub id: String,
    /// Absent only for layouts that ship transformed disparities alone.
    pub disparity: Option<PathBuf>,
    pub transformed: Option<PathBuf>,
    pub rgb: Option<PathBuf>,
    pub label: PathBuf,
}

/// Samples in lexicographic id order, plus a note for every skipped file.
#[derive(Debug, Clone, Default)]
pub struct DatasetListing {
    pub samples: Vec<DatasetSample>,
    pub warnings: Vec<String>,
}

const DISP_DIRS: &[&str] = &["disp", "disparity", "disparities"];
const TDISP_DIRS: &[&str] = &["tdisp", "transformed_disparity", "transformed"];
const LABEL_DIRS: &[&str] = &["label", "labels", "gt", "annotation", "annotations"];
const RGB_DIRS: &[&str] = &["rgb", "left", "image", "images"];
const EXTENSIONS: &[&str] = &["png", "tif", "tiff"];

pub fn load_dataset(root: impl AsRef<Path>, layout: DatasetLayout) -> Result<DatasetListing> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset root is not a directory"),
        ));
    }
    let mut listing = DatasetListing::default();
    match layout {
        DatasetLayout::FlatPairs => flat_pairs(root, &mut listing)?,
        DatasetLayout::StereoPotholes | DatasetLayout::Pothole600 => {
            let mut groups = Vec::new();
            find_groups(root, layout, &mut groups)?;
            for dir in groups {
                grouped(root, &dir, layout, &mut listing)?;
            }
        }
    }
    listing.samples.sort_by(|a, b| a.id.cmp(&b.id));
    for w in &listing.warnings {
        log::warn!("{w}");
    }
    Ok(listing)
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        out.push(entry.map_err(|e| Error::io(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

fn is_raster(p: &Path) -> bool {
    p.is_file()
        && p.extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

fn subdir(dir: &Path, names: &[&str]) -> Option<PathBuf> {
    names.iter().map(|n| dir.join(n)).find(|p| p.is_dir())
}

fn find_groups(dir: &Path, layout: DatasetLayout, out: &mut Vec<PathBuf>) -> Result<()> {
    let key = match layout {
        DatasetLayout::Pothole600 => TDISP_DIRS,
        _ => DISP_DIRS,
    };
    if subdir(dir, key).is_some() && subdir(dir, LABEL_DIRS).is_some() {
        out.push(dir.to_path_buf());
        return Ok(());
    }
    for p in sorted_entries(dir)? {
        if p.is_dir() {
            find_groups(&p, layout, out)?;
        }
    }
    Ok(())
}

fn stems(dir: Option<PathBuf>) -> Result<BTreeMap<String, PathBuf>> {
    let mut map = BTreeMap::new();
    if let Some(dir) = dir {
        for p in sorted_entries(&dir)? {
            if is_raster(&p) {
                if let Some(stem) = p.file_stem().and_then(|s| s.to_str()) {
                    map.entry(stem.to_string()).or_insert(p);
                }
            }
        }
    }
    Ok(map)
}

fn relative_id(root: &Path, dir: &Path, stem: &str) -> String {
    let rel = dir.strip_prefix(root).unwrap_or(dir);
    let mut parts: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
    parts.push(stem.to_string());
    parts.join("/")
}

fn grouped(root: &Path, dir: &Path, layout: DatasetLayout, listing: &mut DatasetListing) -> Result<()> {
    let disp = stems(subdir(dir, DISP_DIRS))?;
    let tdisp = stems(subdir(dir, TDISP_DIRS))?;
    let labels = stems(subdir(dir, LABEL_DIRS))?;
    let rgb = stems(subdir(dir, RGB_DIRS))?;
    let primary = match layout {
        DatasetLayout::Pothole600 => &tdisp,
        _ => &disp,
    };
    for (stem, path) in primary {
        let Some(label) = labels.get(stem) else {
            listing
                .warnings
                .push(format!("{}: no matching label, skipped", path.display()));
            continue;
        };
        let sample = DatasetSample {
            id: relative_id(root, dir, stem),
            disparity: disp.get(stem).cloned(),
            transformed: tdisp.get(stem).cloned(),
            rgb: rgb.get(stem).cloned(),
            label: label.clone(),
        };
        push_checked(sample, listing);
    }
    for (stem, path) in &labels {
        if !primary.contains_key(stem) {
            listing
                .warnings
                .push(format!("{}: label without input, skipped", path.display()));
        }
    }
    Ok(())
}

fn flat_pairs(root: &Path, listing: &mut DatasetListing) -> Result<()> {
    let mut disp = BTreeMap::new();
    let mut labels = BTreeMap::new();
    let mut tdisp = BTreeMap::new();
    let mut rgb = BTreeMap::new();
    for p in sorted_entries(root)? {
        if !is_raster(&p) {
            continue;
        }
        let Some(stem) = p.file_stem().and_then(|s| s.to_str()).map(str::to_string) else {
            continue;
        };
        let split = |suffix: &str| stem.strip_suffix(suffix).map(str::to_string);
        if let Some(s) = split("_disp") {
            disp.entry(s).or_insert(p);
        } else if let Some(s) = split("_gt").or_else(|| split("_label")) {
            labels.entry(s).or_insert(p);
        } else if let Some(s) = split("_tdisp") {
            tdisp.entry(s).or_insert(p);
        } else if let Some(s) = split("_rgb") {
            rgb.entry(s).or_insert(p);
        }
    }
    for (stem, path) in &disp {
        let Some(label) = labels.get(stem) else {
            listing
                .warnings
                .push(format!("{}: no matching label, skipped", path.display()));
            continue;
        };
        push_checked(
            DatasetSample {
                id: stem.clone(),
                disparity: Some(path.clone()),
                transformed: tdisp.get(stem).cloned(),
                rgb: rgb.get(stem).cloned(),
                label: label.clone(),
            },
            listing,
        );
    }
    for (stem, path) in &labels {
        if !disp.contains_key(stem) {
            listing
                .warnings
                .push(format!("{}: label without disparity, skipped", path.display()));
        }
    }
    Ok(())
}

/// Keeps the sample only if every referenced raster has the label's size.
fn push_checked(sample: DatasetSample, listing: &mut DatasetListing) {
    let expected = match image::image_dimensions(&sample.label) {
        Ok(d) => d,
        Err(e) => {
            listing
                .warnings
                .push(format!("{}: unreadable label ({e}), skipped", sample.label.display()));
            return;
        }
    };
    let others = [&sample.disparity, &sample.transformed, &sample.rgb];
    for p in others.into_iter().flatten() {
        match image::image_dimensions(p) {
            Ok(d) if d == expected => {}
            Ok(d) => {
                listing.warnings.push(format!(
                    "{}: size {}x{} differs from label {}x{}, sample {} skipped",
                    p.display(),
                    d.0,
                    d.1,
                    expected.0,
                    expected.1,
                    sample.id
                ));
                return;
            }
            Err(e) => {
                listing
                    .warnings
                    .push(format!("{}: unreadable ({e}), sample {} skipped", p.display(), sample.id));
                return;
            }
        }
    }
    listing.samples.push(sample);
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{GrayImage, ImageBuffer, Luma};

    fn png(path: &Path, w: u32, h: u32) {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        let img: GrayImage = ImageBuffer::from_pixel(w, h, Luma([0u8]));
        img.save(path).unwrap();
    }

    #[test]
    fn flat_pairs_sorted_and_orphans_reported() {
        let dir = tempfile::tempdir().unwrap();
        for s in ["c", "a", "b"] {
            png(&dir.path().join(format!("{s}_disp.png")), 4, 3);
            png(&dir.path().join(format!("{s}_gt.png")), 4, 3);
        }
        png(&dir.path().join("d_disp.png"), 4, 3);
        png(&dir.path().join("e_label.png"), 4, 3);
        let listing = load_dataset(dir.path(), DatasetLayout::FlatPairs).unwrap();
        let ids: Vec<&str> = listing.samples.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert_eq!(listing.warnings.len(), 2);
    }

    #[test]
    fn grouped_layout_pairs_by_stem() {
        let dir = tempfile::tempdir().unwrap();
        let set = dir.path().join("set1");
        for s in ["001", "002"] {
            png(&set.join("disp").join(format!("{s}.png")), 5, 4);
            png(&set.join("label").join(format!("{s}.png")), 5, 4);
            png(&set.join("rgb").join(format!("{s}.png")), 5, 4);
        }
        png(&set.join("tdisp/001.png"), 5, 4);
        png(&set.join("disp/003.png"), 5, 4);
        let listing = load_dataset(dir.path(), DatasetLayout::StereoPotholes).unwrap();
        assert_eq!(listing.samples.len(), 2);
        assert_eq!(listing.samples[0].id, "set1/001");
        assert!(listing.samples[0].transformed.is_some());
        assert!(listing.samples[1].transformed.is_none());
        assert_eq!(listing.warnings.len(), 1);
    }

    #[test]
    fn pothole600_needs_no_disparity() {
        let dir = tempfile::tempdir().unwrap();
        for split in ["training", "testing"] {
            png(&dir.path().join(split).join("tdisp/0.png"), 3, 3);
            png(&dir.path().join(split).join("label/0.png"), 3, 3);
        }
        let listing = load_dataset(dir.path(), DatasetLayout::Pothole600).unwrap();
        let ids: Vec<&str> = listing.samples.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["testing/0", "training/0"]);
        assert!(listing.samples[0].disparity.is_none());
    }

    #[test]
    fn size_mismatch_excluded() {
        let dir = tempfile::tempdir().unwrap();
        png(&dir.path().join("x_disp.png"), 4, 4);
        png(&dir.path().join("x_gt.png"), 4, 5);
        let listing = load_dataset(dir.path(), DatasetLayout::FlatPairs).unwrap();
        assert!(listing.samples.is_empty());
        assert_eq!(listing.warnings.len(), 1);
    }

    #[test]
    fn unknown_layout() {
        assert!(matches!("kitti".parse::<DatasetLayout>(), Err(Error::UnknownLayout(_))));
    }
}
