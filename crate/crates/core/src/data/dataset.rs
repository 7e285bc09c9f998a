use std::path::{Path, PathBuf};

use crate::data::idx::{parse_idx_images, parse_idx_labels, read_maybe_gzip, Images};
use crate::error::{Error, Result};
use crate::foundation::{Rng, Tensor};

pub const NUM_CLASSES: usize = 10;

/// Pixel images paired with digit labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDataset {
    images: Images,
    labels: Vec<u8>,
}

impl RawDataset {
    pub fn new(images: Images, labels: Vec<u8>) -> Result<Self> {
        if images.count() != labels.len() {
            return Err(Error::Argument(format!(
                "{} images but {} labels",
                images.count(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= NUM_CLASSES) {
            return Err(Error::Value(format!("label {bad} is not a digit")));
        }
        Ok(Self { images, labels })
    }

    /// Loads an image/label IDX pair, either file optionally gzip-compressed.
    pub fn load(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Self> {
        let images = parse_idx_images(&read_maybe_gzip(images)?, false)?;
        let labels = parse_idx_labels(&read_maybe_gzip(labels)?)?;
        Self::new(images, labels)
    }

    pub fn images(&self) -> &Images {
        &self.images
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> RawDataset {
        RawDataset {
            images: self.images.select(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Locates the standard MNIST files in `dir`, accepting either the plain
/// name or the name with a `.gz` suffix.
pub fn mnist_paths(dir: impl AsRef<Path>, train: bool) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    let stem = if train { "train" } else { "t10k" };
    let find = |name: String| -> Result<PathBuf> {
        let plain = dir.join(&name);
        if plain.exists() {
            return Ok(plain);
        }
        let gz = dir.join(format!("{name}.gz"));
        if gz.exists() {
            return Ok(gz);
        }
        Err(Error::io(
            plain,
            std::io::Error::new(std::io::ErrorKind::NotFound, "MNIST file not found"),
        ))
    };
    Ok((
        find(format!("{stem}-images-idx3-ubyte"))?,
        find(format!("{stem}-labels-idx1-ubyte"))?,
    ))
}

/// Flattened, `[0, 1]`-scaled features with one-hot labels.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorDataset {
    pub features: Tensor,
    pub labels_onehot: Tensor,
}

impl VectorDataset {
    pub fn new(features: Tensor, labels_onehot: Tensor) -> Result<Self> {
        features.dims2()?;
        let (n, c) = labels_onehot.dims2()?;
        if n != features.rows() {
            return Err(Error::shape(
                "VectorDataset::new",
                features.shape(),
                labels_onehot.shape(),
            ));
        }
        if c != NUM_CLASSES {
            return Err(Error::Argument(format!("expected {NUM_CLASSES} label columns, got {c}")));
        }
        Ok(Self {
            features,
            labels_onehot,
        })
    }

    /// Pairs arbitrary features with integer labels.
    pub fn from_labels(features: Tensor, labels: &[u8]) -> Result<Self> {
        Self::new(features, one_hot(labels)?)
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width(&self) -> usize {
        self.features.cols()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.labels_onehot
            .argmax_rows()
            .into_iter()
            .map(|l| l as u8)
            .collect()
    }

    pub fn select(&self, indices: &[usize]) -> VectorDataset {
        VectorDataset {
            features: self.features.select_rows(indices),
            labels_onehot: self.labels_onehot.select_rows(indices),
        }
    }
}

pub fn one_hot(labels: &[u8]) -> Result<Tensor> {
    let mut data = vec![0.0; labels.len() * NUM_CLASSES];
    for (i, &l) in labels.iter().enumerate() {
        if l as usize >= NUM_CLASSES {
            return Err(Error::Value(format!("label {l} is not a digit")));
        }
        data[i * NUM_CLASSES + l as usize] = 1.0;
    }
    Tensor::matrix(labels.len(), NUM_CLASSES, data)
}

/// `pixel / 255`, flattened row-major, with one-hot labels.
pub fn normalize_and_flatten(raw: &RawDataset) -> VectorDataset {
    let images = raw.images();
    let d = images.pixel_count();
    let features: Vec<f64> = images.pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
    VectorDataset {
        features: Tensor::from_parts_unchecked(vec![raw.len(), d], features),
        labels_onehot: one_hot(raw.labels()).expect("RawDataset labels are validated"),
    }
}

/// Seeded train/validation split: permute all indices with `rng`, keep the
/// first `subset` (or all), and hold out the last `val_fraction` of those.
pub fn split_indices(
    n: usize,
    subset: Option<usize>,
    val_fraction: f64,
    rng: &mut Rng,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&val_fraction) {
        return Err(Error::Argument(format!(
            "validation fraction {val_fraction} outside [0, 1)"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let keep = subset.map_or(n, |s| s.min(n));
    order.truncate(keep);
    let n_val = (keep as f64 * val_fraction).round() as usize;
    let val = order.split_off(keep - n_val);
    Ok((order, val))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(pixels: Vec<u8>, labels: Vec<u8>) -> RawDataset {
        RawDataset::new(
            Images {
                rows: 28,
                cols: 28,
                pixels,
            },
            labels,
        )
        .unwrap()
    }

    #[test]
    fn pixel_scaling() {
        let mut pixels = vec![0u8; 784];
        pixels[0] = 255;
        pixels[1] = 128;
        pixels[28] = 7;
        let ds = normalize_and_flatten(&raw(pixels, vec![4]));
        let f = ds.features.row(0);
        assert_eq!(f[0], 1.0);
        assert_eq!(f[1], 128.0 / 255.0);
        assert!((f[1] - 0.501961).abs() < 1e-6);
        assert_eq!(f[2], 0.0);
        assert_eq!(f[28], 7.0 / 255.0);
        assert_eq!(ds.labels_onehot.row(0), &[0., 0., 0., 0., 1., 0., 0., 0., 0., 0.]);
    }

    #[test]
    fn mismatched_counts_and_bad_labels() {
        let images = Images {
            rows: 28,
            cols: 28,
            pixels: vec![0; 784 * 2],
        };
        assert!(RawDataset::new(images.clone(), vec![1]).is_err());
        assert!(RawDataset::new(images, vec![1, 10]).is_err());
    }

    #[test]
    fn split_is_seeded_and_disjoint() {
        let (t1, v1) = split_indices(100, Some(50), 0.1, &mut Rng::seed_from_u64(1)).unwrap();
        let (t2, v2) = split_indices(100, Some(50), 0.1, &mut Rng::seed_from_u64(1)).unwrap();
        assert_eq!((t1.len(), v1.len()), (45, 5));
        assert_eq!(t1, t2);
        assert_eq!(v1, v2);
        assert!(v1.iter().all(|i| !t1.contains(i)));
        assert!(split_indices(10, None, 1.0, &mut Rng::seed_from_u64(1)).is_err());
    }
}
