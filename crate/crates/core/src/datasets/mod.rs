//! Image classification datasets: IDX (MNIST, Fashion-MNIST) and CIFAR-10
//! binary loaders, normalization, splits, subsampling and ZCA whitening.

mod cifar;
mod idx;
mod split;
mod synthetic;
mod zca;

pub use cifar::{load_cifar10, parse_cifar10, write_cifar10, CIFAR_RECORD_BYTES};
pub use idx::{
    load_idx, parse_idx_images, parse_idx_labels, write_idx_images, write_idx_labels, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC,
};
pub use split::{split, split_indices, subsample, subsample_indices, SplitIndices, SplitSpec};
pub use synthetic::{gaussian_blobs, linearly_separable};
pub use zca::{zca_whiten, Zca, ZCA_EPSILON};

use crate::error::{Error, Result};
use crate::ndcore::Matrix;
use crate::scalar::Scalar;

/// Images exactly as stored on disk: one byte per pixel, rows are samples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawDataset {
    pub pixels: Vec<u8>,
    pub rows: usize,
    pub dim: usize,
    pub labels: Vec<u8>,
}

impl RawDataset {
    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn image(&self, i: usize) -> &[u8] {
        &self.pixels[i * self.dim..(i + 1) * self.dim]
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut pixels = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.rows {
                return Err(Error::IndexOutOfRange { index: i, len: self.rows });
            }
            pixels.extend_from_slice(self.image(i));
            labels.push(self.labels[i]);
        }
        Ok(Self { pixels, rows: indices.len(), dim: self.dim, labels })
    }

    /// Pixels divided by 255 into `[0, 1]`.
    pub fn normalize<T: Scalar>(&self, name: &str, classes: usize) -> Result<Dataset<T>> {
        let scale = T::lit(1.0 / 255.0);
        let data = self.pixels.iter().map(|&p| T::lit(f64::from(p)) * scale).collect();
        let labels = self.labels.iter().map(|&l| usize::from(l)).collect();
        Dataset::new(Matrix::new(self.rows, self.dim, data)?, labels, classes, name)
    }
}

/// Flattened images with integer labels in `[0, classes)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    pub images: Matrix<T>,
    pub labels: Vec<usize>,
    pub classes: usize,
    pub name: String,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(images: Matrix<T>, labels: Vec<usize>, classes: usize, name: &str) -> Result<Self> {
        if labels.len() != images.rows() {
            return Err(Error::LabelCount { labels: labels.len(), rows: images.rows() });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::LabelOutOfRange { label, classes });
        }
        Ok(Self { images, labels, classes, name: name.to_string() })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.images.cols()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Ok(Self {
            images: self.images.select_rows(indices)?,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
            name: self.name.clone(),
        })
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Per-feature mean over all rows.
    pub fn feature_means(&self) -> Vec<T> {
        let n = T::from_usize(self.len().max(1)).expect("row count representable");
        self.images.column_sums().into_iter().map(|s| s / n).collect()
    }

    /// Subtracts `means` from every row (mean-centering with training means).
    pub fn center(&mut self, means: &[T]) -> Result<()> {
        let negated: Vec<T> = means.iter().map(|&m| -m).collect();
        self.images.add_row_broadcast(&negated)
    }
}
