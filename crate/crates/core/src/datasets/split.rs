use crate::error::{Error, Result};
use crate::ndcore::Rng;
use crate::scalar::Scalar;

use super::Dataset;

const SPLIT_STREAM: u64 = 11;
const SUBSAMPLE_STREAM: u64 = 12;

/// How a training source is cut into a training part and an unseen
/// validation part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitSpec {
    /// Rows drawn from the source before partitioning.
    pub budget: usize,
    /// Fraction of the budget used for training; the rest is unseen validation.
    pub train_frac: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(budget: usize, seed: u64) -> Self {
        Self { budget, train_frac: 0.8, seed }
    }

    pub fn unseen_frac(&self) -> f64 {
        1.0 - self.train_frac
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub unseen: Vec<usize>,
}

/// Seeded shuffle of `0..n`, the first `budget` rows cut at
/// `round_half_up(budget · train_frac)`.
pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<SplitIndices> {
    if spec.budget > n {
        return Err(Error::Budget { requested: spec.budget, available: n });
    }
    if !(0.0..=1.0).contains(&spec.train_frac) {
        return Err(Error::InvalidConfig(format!("train fraction {} outside [0, 1]", spec.train_frac)));
    }
    let mut order = Rng::stream(spec.seed, SPLIT_STREAM).permutation(n);
    order.truncate(spec.budget);
    let cut = ((spec.budget as f64 * spec.train_frac + 0.5 + 1e-9).floor() as usize).min(spec.budget);
    let unseen = order.split_off(cut);
    if order.is_empty() {
        return Err(Error::EmptyPartition("train"));
    }
    if unseen.is_empty() {
        return Err(Error::EmptyPartition("unseen validation"));
    }
    Ok(SplitIndices { train: order, unseen })
}

pub fn split<T: Scalar>(data: &Dataset<T>, spec: &SplitSpec) -> Result<(Dataset<T>, Dataset<T>)> {
    let idx = split_indices(data.len(), spec)?;
    Ok((data.select(&idx.train)?, data.select(&idx.unseen)?))
}

/// `n` row indices drawn without replacement.
///
/// Unstratified: the first `n` entries of a seeded permutation. Stratified:
/// every class gets `n / C` rows and the remaining `n mod C` go one each to
/// the first classes of a seeded class permutation; within a class rows are
/// taken in seeded shuffled order. The result is shuffled once more so
/// classes are interleaved.
pub fn subsample_indices(labels: &[usize], classes: usize, n: usize, seed: u64, stratified: bool) -> Result<Vec<usize>> {
    if n > labels.len() {
        return Err(Error::Budget { requested: n, available: labels.len() });
    }
    let mut rng = Rng::stream(seed, SUBSAMPLE_STREAM);
    if !stratified {
        let mut order = rng.permutation(labels.len());
        order.truncate(n);
        return Ok(order);
    }
    if n < classes {
        return Err(Error::StratifiedTooSmall { n, classes });
    }
    let mut by_class = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= classes {
            return Err(Error::LabelOutOfRange { label: l, classes });
        }
        by_class[l].push(i);
    }
    let mut quota = vec![n / classes; classes];
    for &c in rng.permutation(classes).iter().take(n % classes) {
        quota[c] += 1;
    }
    let mut picked = Vec::with_capacity(n);
    for (class, rows) in by_class.iter_mut().enumerate() {
        if rows.len() < quota[class] {
            return Err(Error::ClassQuota { class, quota: quota[class], available: rows.len() });
        }
        rng.shuffle(rows);
        picked.extend_from_slice(&rows[..quota[class]]);
    }
    rng.shuffle(&mut picked);
    Ok(picked)
}

pub fn subsample<T: Scalar>(data: &Dataset<T>, n: usize, seed: u64, stratified: bool) -> Result<Dataset<T>> {
    data.select(&subsample_indices(&data.labels, data.classes, n, seed, stratified)?)
}
