//! Neuron-specific dropout.
//!
//! Per layer and per class, the units whose mean activation on the training
//! batch deviates most from their mean activation on the unseen-validation
//! split are dropped. The pipeline is: group batch rows by class
//! ([`class_group`]), average each unit per class ([`class_means`]), rank the
//! train-vs-reference deviation and drop the top fraction ([`build_masks`]),
//! then multiply each row by its class mask ([`NsDropoutLayer::apply_mask`]).

mod churn;
mod eval;
mod layer;
mod masks;
mod means;
pub mod trace;

pub use churn::{mask_churn, Churn};
pub use eval::{resolve_eval_mask, EvalMode, ResolvedMasks};
pub use layer::{MaskSelection, NsDropoutLayer};
pub use masks::{build_masks, drop_count, Deviation, MaskSet};
pub use means::{class_group, class_means, ClassMeans};
