//! Source loading and the train / unseen-validation / test preparation shared
//! by every run.

use std::path::Path;

use nsd_core::datasets::{gaussian_blobs, load_cifar10, load_idx, split_indices, subsample_indices, RawDataset, SplitSpec, Zca};
use nsd_core::Dataset;

use crate::config::{DatasetConfig, DatasetKind, ResolvedConfig};
use crate::error::{HarnessError, Result};

pub const IDX_FILES: [&str; 4] =
    ["train-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"];

pub const CIFAR_TRAIN_FILES: [&str; 5] =
    ["data_batch_1.bin", "data_batch_2.bin", "data_batch_3.bin", "data_batch_4.bin", "data_batch_5.bin"];

pub const CIFAR_TEST_FILE: &str = "test_batch.bin";

#[derive(Clone, Debug)]
enum Rows {
    /// Bytes from disk; normalized after row selection.
    Raw(RawDataset),
    Ready(Dataset),
}

impl Rows {
    fn len(&self) -> usize {
        match self {
            Rows::Raw(r) => r.len(),
            Rows::Ready(d) => d.len(),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Rows::Raw(r) => r.dim,
            Rows::Ready(d) => d.dim(),
        }
    }

    fn labels(&self) -> Vec<usize> {
        match self {
            Rows::Raw(r) => r.labels.iter().map(|&l| usize::from(l)).collect(),
            Rows::Ready(d) => d.labels.clone(),
        }
    }

    fn take(&self, indices: Option<&[usize]>, name: &str, classes: usize) -> Result<Dataset> {
        Ok(match (self, indices) {
            (Rows::Raw(r), Some(idx)) => r.subset(idx)?.normalize(name, classes)?,
            (Rows::Raw(r), None) => r.normalize(name, classes)?,
            (Rows::Ready(d), Some(idx)) => d.select(idx)?,
            (Rows::Ready(d), None) => d.clone(),
        })
    }
}

/// A dataset's official training and test sets as loaded.
#[derive(Clone, Debug)]
pub struct Source {
    pub name: String,
    pub classes: usize,
    train: Rows,
    test: Rows,
}

impl Source {
    pub fn train_rows(&self) -> usize {
        self.train.len()
    }

    pub fn test_rows(&self) -> usize {
        self.test.len()
    }

    pub fn dim(&self) -> usize {
        self.train.dim()
    }

    pub fn train_labels(&self) -> Vec<usize> {
        self.train.labels()
    }

    /// Builds a source from in-memory splits.
    pub fn from_datasets(train: Dataset, test: Dataset) -> Result<Self> {
        if train.dim() != test.dim() || train.classes != test.classes {
            return Err(HarnessError::Config("train and test sets disagree on shape".into()));
        }
        Ok(Self { name: train.name.clone(), classes: train.classes, train: Rows::Ready(train), test: Rows::Ready(test) })
    }

    pub fn from_raw(name: &str, classes: usize, train: RawDataset, test: RawDataset) -> Result<Self> {
        if train.dim != test.dim {
            return Err(HarnessError::Config("train and test sets disagree on shape".into()));
        }
        Ok(Self { name: name.to_string(), classes, train: Rows::Raw(train), test: Rows::Raw(test) })
    }

    /// Loads the dataset named by `cfg`. Synthetic data is generated from
    /// `seed`; the others are read from the resolved data root.
    pub fn load(cfg: &DatasetConfig, seed: u64) -> Result<Self> {
        match cfg.kind {
            DatasetKind::Synthetic => {
                let s = &cfg.synthetic;
                let (train, test) = gaussian_blobs(s.train, s.test, s.dim, s.classes, s.noise, seed)?;
                Self::from_datasets(train, test)
            }
            DatasetKind::Mnist | DatasetKind::FashionMnist => {
                let root = cfg.resolved_root();
                let [ti, tl, vi, vl] = IDX_FILES.map(|f| root.join(f));
                let train = load_idx(&ti, &tl)?;
                let test = load_idx(&vi, &vl)?;
                Self::from_raw(cfg.kind.name(), 10, train, test)
            }
            DatasetKind::Cifar10 => {
                let root = cfg.resolved_root();
                let train_paths: Vec<_> = CIFAR_TRAIN_FILES.iter().map(|f| root.join(f)).collect();
                let train = load_cifar10(&train_paths)?;
                let test = load_cifar10(&[root.join(CIFAR_TEST_FILE)])?;
                Self::from_raw(cfg.kind.name(), 10, train, test)
            }
        }
    }

    /// True when every file `load` would read for `cfg` exists.
    pub fn files_present(cfg: &DatasetConfig) -> bool {
        let root = cfg.resolved_root();
        let present = |f: &str| Path::new(&root).join(f).is_file();
        match cfg.kind {
            DatasetKind::Synthetic => true,
            DatasetKind::Mnist | DatasetKind::FashionMnist => IDX_FILES.iter().all(|f| present(f)),
            DatasetKind::Cifar10 => CIFAR_TRAIN_FILES.iter().all(|f| present(f)) && present(CIFAR_TEST_FILE),
        }
    }
}

/// Source-row indices of the two training partitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub train: Vec<usize>,
    pub unseen: Vec<usize>,
}

/// Draws the budget from `labels` and cuts it into training and unseen
/// validation rows.
///
/// Random sampling takes a seeded permutation prefix and cuts it at
/// `round_half_up(budget · train_frac)`. Stratified sampling draws the budget
/// class-balanced and, when the unseen part has at least one row per class,
/// also draws the unseen part class-balanced from within it.
pub fn partition(
    labels: &[usize],
    classes: usize,
    budget: usize,
    train_frac: f64,
    stratified: bool,
    seed: u64,
) -> Result<Partition> {
    let picked = subsample_indices(labels, classes, budget, seed, stratified)?;
    let spec = SplitSpec { budget, train_frac, seed };
    if !stratified {
        let s = split_indices(budget, &spec)?;
        return Ok(Partition {
            train: s.train.iter().map(|&i| picked[i]).collect(),
            unseen: s.unseen.iter().map(|&i| picked[i]).collect(),
        });
    }
    let cut = split_indices(budget, &spec)?.train.len();
    let n_unseen = budget - cut;
    let picked_labels: Vec<usize> = picked.iter().map(|&i| labels[i]).collect();
    let within = subsample_indices(&picked_labels, classes, n_unseen, seed ^ 0x5eed, n_unseen >= classes)?;
    let mut is_unseen = vec![false; budget];
    for &i in &within {
        is_unseen[i] = true;
    }
    Ok(Partition {
        train: (0..budget).filter(|&i| !is_unseen[i]).map(|i| picked[i]).collect(),
        unseen: within.iter().map(|&i| picked[i]).collect(),
    })
}

/// The three splits a run trains and scores on, after preprocessing.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub train: Dataset,
    pub unseen: Dataset,
    pub test: Dataset,
    pub partition: Partition,
}

/// Selects the configured budget and applies the configured preprocessing,
/// with centering means and the ZCA transform fitted on the training split.
pub fn prepare(source: &Source, resolved: &ResolvedConfig) -> Result<Prepared> {
    let cfg = &resolved.config;
    let labels = source.train_labels();
    let part = partition(&labels, source.classes, resolved.budget, cfg.split.train_frac, resolved.stratified, cfg.seed)?;
    let mut train = source.train.take(Some(&part.train), &source.name, source.classes)?;
    let mut unseen = source.train.take(Some(&part.unseen), &source.name, source.classes)?;
    let mut test = source.test.take(None, &source.name, source.classes)?;
    if cfg.dataset.center {
        let means = train.feature_means();
        for d in [&mut train, &mut unseen, &mut test] {
            d.center(&means)?;
        }
    }
    if cfg.dataset.zca {
        let zca = Zca::fit(&train.images, cfg.dataset.zca_epsilon)?;
        for d in [&mut train, &mut unseen, &mut test] {
            d.images = zca.apply(&d.images)?;
        }
    }
    Ok(Prepared { train, unseen, test, partition: part })
}
