//! Feedforward network core: dense layers, ReLU, inverted dropout, softmax
//! cross-entropy, SGD with momentum, finite-difference gradient checks and
//! binary checkpoints.

mod checkpoint;
mod gradcheck;
mod layers;
mod loss;
mod network;
mod sgd;

pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, DenseParams, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use gradcheck::{grad_check, GradCheckReport, ParamKind, ParamRef, GRAD_CHECK_EPSILON, GRAD_CHECK_FLOOR};
pub use layers::{DenseLayer, Init, Phase, Relu, StandardDropout};
pub use loss::{accuracy, softmax_cross_entropy};
pub use network::{Layer, MlpSpec, Network, Regularizer};
pub use sgd::{Sgd, SgdConfig};

pub use crate::nsdropout::NsDropoutLayer;
