use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ndcore::Matrix;
use crate::scalar::Scalar;

use super::MaskSelection;

/// How evaluation picks a class mask for rows whose class is not known to
/// the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EvalMode {
    /// True label indexes the mask (label-dependent).
    Labeled,
    /// Argmax of an unmasked pass indexes the mask (label-free, two passes).
    Predicted,
    /// Units kept by any class mask.
    Union,
    /// Units kept by every class mask.
    Intersection,
    /// No masking at evaluation time.
    Off,
}

impl EvalMode {
    pub const ALL: [EvalMode; 5] =
        [EvalMode::Labeled, EvalMode::Predicted, EvalMode::Union, EvalMode::Intersection, EvalMode::Off];

    pub fn name(self) -> &'static str {
        match self {
            EvalMode::Labeled => "labeled",
            EvalMode::Predicted => "predicted",
            EvalMode::Union => "union",
            EvalMode::Intersection => "intersection",
            EvalMode::Off => "off",
        }
    }
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EvalMode::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| Error::InvalidConfig(format!("unknown eval mode {s:?}")))
    }
}

/// Mask choice for a whole evaluation batch, owning its per-row classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResolvedMasks {
    PerRow(Vec<usize>),
    Union,
    Intersection,
    Off,
}

impl ResolvedMasks {
    pub fn selection(&self) -> MaskSelection<'_> {
        match self {
            ResolvedMasks::PerRow(c) => MaskSelection::PerRow(c),
            ResolvedMasks::Union => MaskSelection::Union,
            ResolvedMasks::Intersection => MaskSelection::Intersection,
            ResolvedMasks::Off => MaskSelection::Off,
        }
    }
}

/// Turns an evaluation mode into concrete per-row mask indices.
///
/// `labels` is required by [`EvalMode::Labeled`]; `unmasked_logits`, the output
/// of a pass with every mask off, is required by [`EvalMode::Predicted`].
pub fn resolve_eval_mask<T: Scalar>(
    mode: EvalMode,
    labels: Option<&[usize]>,
    unmasked_logits: Option<&Matrix<T>>,
) -> Result<ResolvedMasks> {
    Ok(match mode {
        EvalMode::Labeled => ResolvedMasks::PerRow(labels.ok_or(Error::MissingLabels)?.to_vec()),
        EvalMode::Predicted => {
            let logits = unmasked_logits
                .ok_or_else(|| Error::InvalidConfig("predicted mode needs the logits of an unmasked pass".into()))?;
            ResolvedMasks::PerRow(logits.argmax_rows())
        }
        EvalMode::Union => ResolvedMasks::Union,
        EvalMode::Intersection => ResolvedMasks::Intersection,
        EvalMode::Off => ResolvedMasks::Off,
    })
}
