use crate::error::{Error, Result};
use crate::ndcore::{argsort_rows_by_key, row_mean, Matrix};
use crate::scalar::Scalar;

/// Row indices of a batch grouped by class label.
///
/// Rows are ordered with a stable argsort on the labels and cut into one run
/// per class, so each group keeps the batch order of its samples. Classes
/// without samples get an empty group.
pub fn class_group(labels: &[usize], classes: usize) -> Result<Vec<Vec<usize>>> {
    if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::LabelOutOfRange { label, classes });
    }
    let mut groups = vec![Vec::new(); classes];
    for idx in argsort_rows_by_key(labels) {
        groups[labels[idx]].push(idx);
    }
    Ok(groups)
}

/// Per-class, per-unit mean activation table (classes × units).
#[derive(Clone, Debug, PartialEq)]
pub struct ClassMeans<T> {
    means: Matrix<T>,
    counts: Vec<usize>,
}

impl<T: Scalar> ClassMeans<T> {
    /// Builds a table directly. Rows of classes with a zero count are ignored.
    pub fn from_parts(means: Matrix<T>, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != means.rows() {
            return Err(Error::LabelCount { labels: counts.len(), rows: means.rows() });
        }
        Ok(Self { means, counts })
    }

    pub fn classes(&self) -> usize {
        self.means.rows()
    }

    pub fn units(&self) -> usize {
        self.means.cols()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn is_present(&self, class: usize) -> bool {
        self.counts.get(class).is_some_and(|&n| n > 0)
    }

    /// Mean vector of `class`, or `None` when the class had no samples.
    pub fn mean(&self, class: usize) -> Option<&[T]> {
        self.is_present(class).then(|| self.means.row(class))
    }

    /// Both tables multiplied by the same factor; used by property tests.
    pub fn scaled(&self, factor: T) -> Self {
        let mut means = self.means.clone();
        means.scale(factor);
        Self { means, counts: self.counts.clone() }
    }
}

/// Class-conditional mean of each column of `z`.
pub fn class_means<T: Scalar>(z: &Matrix<T>, groups: &[Vec<usize>]) -> Result<ClassMeans<T>> {
    let mut means = Matrix::zeros(groups.len(), z.cols());
    let mut counts = Vec::with_capacity(groups.len());
    for (c, rows) in groups.iter().enumerate() {
        counts.push(rows.len());
        if rows.is_empty() {
            continue;
        }
        means.row_mut(c).copy_from_slice(&row_mean(z, rows)?);
    }
    Ok(ClassMeans { means, counts })
}
