//! Minimal dense numerical kernel.

mod matrix;
mod ops;
mod rng;

pub use matrix::Matrix;
pub use ops::{argsort_rows_by_key, row_mean, top_k_indices};
pub use rng::Rng;
