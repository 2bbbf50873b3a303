use crate::error::{Error, Result};
use crate::ndcore::Matrix;
use crate::scalar::Scalar;

use super::masks::{build_masks, drop_count, Deviation, MaskSet};
use super::ClassMeans;

/// Which class mask each row of a batch goes through.
#[derive(Clone, Copy, Debug)]
pub enum MaskSelection<'a> {
    /// Row `b` uses the mask of class `classes[b]`.
    PerRow(&'a [usize]),
    /// One shared mask keeping units kept by any class.
    Union,
    /// One shared mask keeping units kept by every class.
    Intersection,
    /// No masking.
    Off,
}

#[derive(Clone, Debug)]
enum Applied<T> {
    Identity,
    Rows(Matrix<T>),
}

/// Class-conditional deterministic dropout slot.
///
/// Holds one mask per class. Masks change only through [`NsDropoutLayer::refresh`]
/// (or [`NsDropoutLayer::set_masks`]) and are applied without rescaling the kept
/// units, in training and evaluation alike.
#[derive(Clone, Debug)]
pub struct NsDropoutLayer<T> {
    units: usize,
    classes: usize,
    p: f64,
    deviation: Deviation,
    current: MaskSet,
    previous: Option<MaskSet>,
    applied: Option<Applied<T>>,
}

impl<T: Scalar> NsDropoutLayer<T> {
    /// Rejects fractions outside `[0, 1]` and fractions that would remove
    /// every unit of the layer.
    pub fn new(units: usize, classes: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::InvalidDropFraction(p));
        }
        if p > 0.0 && drop_count(units, p) >= units {
            return Err(Error::DropsAllUnits { p, units });
        }
        Ok(Self {
            units,
            classes,
            p,
            deviation: Deviation::Absolute,
            current: MaskSet::pass_through(classes, units),
            previous: None,
            applied: None,
        })
    }

    pub fn with_deviation(mut self, deviation: Deviation) -> Self {
        self.deviation = deviation;
        self
    }

    pub fn units(&self) -> usize {
        self.units
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn deviation(&self) -> Deviation {
        self.deviation
    }

    pub fn masks(&self) -> &MaskSet {
        &self.current
    }

    /// Masks in force before the latest refresh.
    pub fn previous_masks(&self) -> Option<&MaskSet> {
        self.previous.as_ref()
    }

    /// Replaces the current masks, keeping the old ones as `previous`.
    pub fn set_masks(&mut self, masks: MaskSet) -> Result<()> {
        if masks.classes() != self.classes || masks.units() != self.units {
            return Err(Error::ShapeMismatch {
                op: "NsDropoutLayer::set_masks",
                left: (self.classes, self.units),
                right: (masks.classes(), masks.units()),
            });
        }
        self.previous = Some(std::mem::replace(&mut self.current, masks));
        Ok(())
    }

    /// Rebuilds the masks from fresh training and reference class means.
    pub fn refresh(&mut self, train: &ClassMeans<T>, reference: &ClassMeans<T>) -> Result<&MaskSet> {
        if train.units() != self.units || train.classes() != self.classes {
            return Err(Error::ShapeMismatch {
                op: "NsDropoutLayer::refresh",
                left: (self.classes, self.units),
                right: (train.classes(), train.units()),
            });
        }
        let masks = build_masks(train, reference, self.p, self.deviation)?;
        self.set_masks(masks)?;
        Ok(&self.current)
    }

    /// Thinned output `r ⊙ y`, one mask per row, remembered for backward.
    pub fn apply_mask(&mut self, y: &Matrix<T>, selection: MaskSelection<'_>) -> Result<Matrix<T>> {
        if y.cols() != self.units {
            return Err(Error::ShapeMismatch {
                op: "NsDropoutLayer::apply_mask",
                left: y.shape(),
                right: (self.classes, self.units),
            });
        }
        let keep_row = |keep: &[bool]| -> Vec<T> { keep.iter().map(|&k| if k { T::one() } else { T::zero() }).collect() };
        let masks = match selection {
            MaskSelection::Off => None,
            MaskSelection::PerRow(classes) => {
                if classes.len() != y.rows() {
                    return Err(Error::LabelCount { labels: classes.len(), rows: y.rows() });
                }
                let table: Vec<Vec<T>> = self.current.rows().map(keep_row).collect();
                let mut data = Vec::with_capacity(y.rows() * self.units);
                for &c in classes {
                    let row = table.get(c).ok_or(Error::LabelOutOfRange { label: c, classes: self.classes })?;
                    data.extend_from_slice(row);
                }
                Some(Matrix::new(y.rows(), self.units, data)?)
            }
            MaskSelection::Union | MaskSelection::Intersection => {
                let shared =
                    if matches!(selection, MaskSelection::Union) { self.current.union() } else { self.current.intersection() };
                let row = keep_row(&shared);
                let mut data = Vec::with_capacity(y.rows() * self.units);
                for _ in 0..y.rows() {
                    data.extend_from_slice(&row);
                }
                Some(Matrix::new(y.rows(), self.units, data)?)
            }
        };
        match masks {
            None => {
                self.applied = Some(Applied::Identity);
                Ok(y.clone())
            }
            Some(m) => {
                let out = y.hadamard(&m)?;
                self.applied = Some(Applied::Rows(m));
                Ok(out)
            }
        }
    }

    /// Routes the upstream gradient through the same per-row masks.
    pub fn mask_backward(&mut self, dy: &Matrix<T>) -> Result<Matrix<T>> {
        match &self.applied {
            None => Err(Error::BackwardBeforeForward("nsdropout")),
            Some(Applied::Identity) => Ok(dy.clone()),
            Some(Applied::Rows(m)) => dy.hadamard(m),
        }
    }
}
