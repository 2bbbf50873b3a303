//! Feedforward networks with neuron-specific dropout.
//!
//! Neuron-specific dropout (NSDropout) is a deterministic regularizer: for each
//! class it zeroes the fixed fraction `p` of a layer's units whose mean
//! activation on the training batch is farthest from their mean activation on
//! a held-out ("unseen validation") split. The crate provides the dense
//! numerical kernel, the network and optimizer, the mask machinery, and dataset
//! loaders used by the `nsd-harness` experiment runner.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what training and gradient
//! checking use.

pub mod datasets;
pub mod error;
pub mod ndcore;
pub mod nn;
pub mod nsdropout;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision matrix.
pub type Matrix2D = ndcore::Matrix<f64>;
/// Double-precision network.
pub type Network = nn::Network<f64>;
pub type DenseLayer = nn::DenseLayer<f64>;
pub type NsDropoutLayer = nsdropout::NsDropoutLayer<f64>;
pub type ClassMeans = nsdropout::ClassMeans<f64>;
pub type Dataset = datasets::Dataset<f64>;

pub use datasets::Zca;
pub use ndcore::{Matrix, Rng};
pub use nsdropout::MaskSet;
