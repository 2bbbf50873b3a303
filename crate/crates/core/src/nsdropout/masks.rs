use crate::error::{Error, Result};
use crate::ndcore::top_k_indices;
use crate::scalar::Scalar;

use super::ClassMeans;

/// How far a unit's training-batch class mean is from the reference class mean.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Deviation {
    /// `|train − reference|`; the units farthest in either direction drop.
    #[default]
    Absolute,
    /// `train − reference`; only units whose training mean overshoots drop.
    Signed,
}

/// Number of units a fraction `p` of `units` drops: `units · p` rounded half up.
///
/// A 1e-9 slack absorbs binary representation error of decimal fractions
/// (`45 · 0.7` evaluates to `31.499999999999996`).
pub fn drop_count(units: usize, p: f64) -> usize {
    let exact = units as f64 * p;
    ((exact + 0.5 + 1e-9).floor() as usize).min(units)
}

/// One binary keep/drop vector per class over a layer's units.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskSet {
    classes: usize,
    units: usize,
    p: f64,
    drop_count: usize,
    keep: Vec<bool>,
    /// `false` for rows that fell back to all-ones because the class was
    /// absent from one of the mean tables.
    built: Vec<bool>,
}

impl MaskSet {
    /// All units kept for every class; the state before the first refresh.
    pub fn pass_through(classes: usize, units: usize) -> Self {
        Self { classes, units, p: 0.0, drop_count: 0, keep: vec![true; classes * units], built: vec![false; classes] }
    }

    /// Assembles a mask set from explicit rows (e.g. read back from a trace).
    pub fn from_rows(rows: Vec<Vec<bool>>, p: f64) -> Result<Self> {
        let classes = rows.len();
        let units = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != units) {
            return Err(Error::ShapeMismatch { op: "MaskSet::from_rows", left: (classes, units), right: (1, bad.len()) });
        }
        let expected = drop_count(units, p);
        let built = rows.iter().map(|r| r.iter().filter(|&&k| !k).count() == expected && expected > 0).collect();
        Ok(Self { classes, units, p, drop_count: expected, keep: rows.concat(), built })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn units(&self) -> usize {
        self.units
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn drop_count(&self) -> usize {
        self.drop_count
    }

    /// Keep flags of one class (`true` = unit kept).
    pub fn row(&self, class: usize) -> &[bool] {
        &self.keep[class * self.units..(class + 1) * self.units]
    }

    /// Whether the row of `class` came from a mean comparison rather than the
    /// all-ones fallback.
    pub fn is_built(&self, class: usize) -> bool {
        self.built[class]
    }

    pub fn dropped(&self, class: usize) -> Vec<usize> {
        self.row(class).iter().enumerate().filter_map(|(i, &k)| (!k).then_some(i)).collect()
    }

    /// Units kept by at least one class mask.
    pub fn union(&self) -> Vec<bool> {
        (0..self.units).map(|u| (0..self.classes).any(|c| self.row(c)[u])).collect()
    }

    /// Units kept by every class mask.
    pub fn intersection(&self) -> Vec<bool> {
        (0..self.units).map(|u| (0..self.classes).all(|c| self.row(c)[u])).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[bool]> {
        self.keep.chunks_exact(self.units.max(1)).take(self.classes)
    }
}

/// Per-class masks from training-batch and reference class means.
///
/// For every class present in both tables, the deviation of each unit's
/// training mean from its reference mean is ranked and the
/// `drop_count(units, p)` largest are dropped, lower unit index first on
/// ties. A class absent from either table keeps all of its units.
pub fn build_masks<T: Scalar>(train: &ClassMeans<T>, reference: &ClassMeans<T>, p: f64, deviation: Deviation) -> Result<MaskSet> {
    if train.classes() != reference.classes() || train.units() != reference.units() {
        return Err(Error::ShapeMismatch {
            op: "build_masks",
            left: (train.classes(), train.units()),
            right: (reference.classes(), reference.units()),
        });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidDropFraction(p));
    }
    let (classes, units) = (train.classes(), train.units());
    let k = drop_count(units, p);
    let mut keep = vec![true; classes * units];
    let mut built = vec![false; classes];
    let mut absent = Vec::new();
    for c in 0..classes {
        let (Some(t), Some(r)) = (train.mean(c), reference.mean(c)) else {
            absent.push(c);
            continue;
        };
        let scores: Vec<T> = t
            .iter()
            .zip(r)
            .map(|(&a, &b)| match deviation {
                Deviation::Absolute => (a - b).abs(),
                Deviation::Signed => a - b,
            })
            .collect();
        for u in top_k_indices(&scores, k)? {
            keep[c * units + u] = false;
        }
        built[c] = true;
    }
    if !absent.is_empty() && k > 0 {
        log::warn!("classes {absent:?} missing from a mean table; their masks keep every unit");
    }
    Ok(MaskSet { classes, units, p, drop_count: k, keep, built })
}
